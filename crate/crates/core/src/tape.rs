//! Growable tape addressed by signed cell index.

use serde::{Deserialize, Serialize};

/// Zero-initialized cells, grown on demand in either direction.
///
/// Logical cell `i` lives at physical slot `origin + i`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tape {
    cells: Vec<u32>,
    origin: usize,
}

const LEFT_CHUNK: usize = 64;

impl Tape {
    pub fn new() -> Self {
        Tape {
            cells: vec![0; 1],
            origin: 0,
        }
    }

    pub fn from_cells(cells: &[u32]) -> Self {
        let mut t = Tape {
            cells: cells.to_vec(),
            origin: 0,
        };
        if t.cells.is_empty() {
            t.cells.push(0);
        }
        t
    }

    pub fn get(&self, index: i64) -> u32 {
        self.slot(index).map_or(0, |p| self.cells[p])
    }

    pub fn set(&mut self, index: i64, value: u32) {
        let p = self.ensure(index);
        self.cells[p] = value;
    }

    pub fn get_mut(&mut self, index: i64) -> &mut u32 {
        let p = self.ensure(index);
        &mut self.cells[p]
    }

    /// Lowest allocated logical index.
    pub fn low(&self) -> i64 {
        -(self.origin as i64)
    }

    /// One past the highest allocated logical index.
    pub fn high(&self) -> i64 {
        self.cells.len() as i64 - self.origin as i64
    }

    /// Values of the logical cells `lo..hi`, zeros where unallocated.
    pub fn window(&self, lo: i64, hi: i64) -> Vec<u32> {
        (lo..hi).map(|i| self.get(i)).collect()
    }

    /// Cells from logical index 0 up to the last nonzero cell.
    pub fn nonnegative_prefix(&self) -> Vec<u32> {
        let start = self.origin;
        let end = self.cells[start.min(self.cells.len())..]
            .iter()
            .rposition(|&c| c != 0)
            .map_or(start, |p| start + p + 1);
        self.cells[start..end].to_vec()
    }

    fn slot(&self, index: i64) -> Option<usize> {
        let p = index.checked_add(self.origin as i64)?;
        (p >= 0 && (p as usize) < self.cells.len()).then_some(p as usize)
    }

    /// Makes `index` addressable and returns its physical slot.
    pub(crate) fn ensure(&mut self, index: i64) -> usize {
        let p = index + self.origin as i64;
        if p < 0 {
            let grow = ((-p) as usize).max(self.origin.max(LEFT_CHUNK));
            let mut cells = vec![0; grow + self.cells.len()];
            cells[grow..].copy_from_slice(&self.cells);
            self.cells = cells;
            self.origin += grow;
            return (index + self.origin as i64) as usize;
        }
        let p = p as usize;
        if p >= self.cells.len() {
            let new_len = (p + 1).max(self.cells.len() * 2);
            self.cells.resize(new_len, 0);
        }
        p
    }

    pub(crate) fn raw_mut(&mut self) -> &mut Vec<u32> {
        &mut self.cells
    }
}

/// A contiguous run of cells starting at a logical index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TapeWindow {
    pub start: i64,
    pub cells: Vec<u32>,
}
