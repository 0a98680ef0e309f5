#![allow(dead_code)]

use std::collections::BTreeMap;

pub const QUINE: &str = ">,[.>,]<[<]>[.>]!>,[.>,]<[<]>[.>]!";

/// Programs with defined behavior under every profile, `code!data`.
pub const EXAMPLES: &[&str] = &[
    ",+.!a",
    "a!",
    ",[>+>+<<-]>.>.!X",
    QUINE,
    ",>,!ab",
    ",[.[-],]!a",
    ",!",
    "+,.!",
    "+[>+++[>++<-]<-]>>.!",
    ",[.[-],]!hello",
    "comments are ignored +++ . !",
    "++++++++[>++++++++<-]>+.+.+.!",
];

/// Programs whose behavior is only defined by the C++ reference: they move
/// left of cell 0 or wrap.
pub const APPENDIX_ONLY: &[&str] = &["<!", "<+.!", "<<->+.<.!", "-.!", "-[<+>-]<.!"];

/// Outcome of the reference interpreter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceRun {
    pub output: Vec<u8>,
    /// Nonzero cells only, like a `std::map` that was read but never set.
    pub cells: BTreeMap<i64, u8>,
    pub head: i64,
    pub steps: u64,
    pub finished: bool,
}

/// Transliteration of the C++ reference interpreter: reads code up to the
/// first '!', keeps comments in place, and scans for matching brackets at
/// run time. Byte cells wrap; reading past the data leaves the cell alone;
/// the sparse map allows negative indices.
pub fn appendix_reference(stream: &[u8], step_limit: u64) -> ReferenceRun {
    let split = stream.iter().position(|&b| b == b'!').unwrap_or(stream.len());
    let c = &stream[..split];
    let mut input = stream.get(split + 1..).unwrap_or(&[]).iter();
    let mut m: BTreeMap<i64, u8> = BTreeMap::new();
    let mut p: i64 = 0;
    let mut out = Vec::new();
    let mut steps = 0;
    let mut i: isize = 0;
    while (i as usize) < c.len() {
        if steps == step_limit {
            return finish(out, m, p, steps, false);
        }
        let get = |m: &BTreeMap<i64, u8>, p| m.get(&p).copied().unwrap_or(0);
        let mut l = 1i32;
        let ch = |i: isize| c[i as usize];
        if !b"<>+-.,[]".contains(&ch(i)) {
            i += 1;
            continue;
        }
        steps += 1;
        if ch(i) == b']' && get(&m, p) != 0 {
            while l != 0 {
                i -= 1;
                l += (ch(i) == b']') as i32 - (ch(i) == b'[') as i32;
            }
        }
        if ch(i) == b'[' && get(&m, p) == 0 {
            while l != 0 {
                i += 1;
                l -= (ch(i) == b']') as i32 - (ch(i) == b'[') as i32;
            }
        }
        match ch(i) {
            b'+' => *m.entry(p).or_default() = get(&m, p).wrapping_add(1),
            b'-' => *m.entry(p).or_default() = get(&m, p).wrapping_sub(1),
            b'.' => out.push(get(&m, p)),
            b',' => {
                if let Some(&b) = input.next() {
                    m.insert(p, b);
                }
            }
            b'>' => p += 1,
            b'<' => p -= 1,
            _ => {}
        }
        i += 1;
    }
    finish(out, m, p, steps, true)
}

fn finish(output: Vec<u8>, mut cells: BTreeMap<i64, u8>, head: i64, steps: u64, finished: bool) -> ReferenceRun {
    cells.retain(|_, v| *v != 0);
    ReferenceRun {
        output,
        cells,
        head,
        steps,
        finished,
    }
}

/// Nonzero cells of an engine's final tape, for comparison with
/// [`appendix_reference`].
pub fn nonzero_cells(state: &dbfi::MachineState) -> BTreeMap<i64, u8> {
    let (lo, hi) = state.visited();
    (lo..=hi)
        .filter_map(|i| {
            let v = state.tape.get(i);
            (v != 0).then_some((i, v as u8))
        })
        .collect()
}
