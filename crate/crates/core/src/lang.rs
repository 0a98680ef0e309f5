//! dbfi-BF language definitions: instructions, the program parser, dbfi's
//! instruction codes, and the engine configuration shared by every engine.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Separator between the code part and the data part of a dbfi-BF stream.
pub const SEPARATOR: u8 = b'!';

/// One of the eight instructions recognized by the machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Instruction {
    MoveRight,
    MoveLeft,
    Inc,
    Dec,
    Input,
    Output,
    LoopOpen,
    LoopClose,
}

impl Instruction {
    pub const ALL: [Instruction; 8] = [
        Instruction::MoveRight,
        Instruction::MoveLeft,
        Instruction::Inc,
        Instruction::Dec,
        Instruction::Input,
        Instruction::Output,
        Instruction::LoopOpen,
        Instruction::LoopClose,
    ];

    pub fn from_byte(b: u8) -> Option<Instruction> {
        Some(match b {
            b'>' => Instruction::MoveRight,
            b'<' => Instruction::MoveLeft,
            b'+' => Instruction::Inc,
            b'-' => Instruction::Dec,
            b',' => Instruction::Input,
            b'.' => Instruction::Output,
            b'[' => Instruction::LoopOpen,
            b']' => Instruction::LoopClose,
            _ => return None,
        })
    }

    pub fn to_byte(self) -> u8 {
        match self {
            Instruction::MoveRight => b'>',
            Instruction::MoveLeft => b'<',
            Instruction::Inc => b'+',
            Instruction::Dec => b'-',
            Instruction::Input => b',',
            Instruction::Output => b'.',
            Instruction::LoopOpen => b'[',
            Instruction::LoopClose => b']',
        }
    }

    pub fn to_char(self) -> char {
        self.to_byte() as char
    }

    pub fn is_bracket(self) -> bool {
        matches!(self, Instruction::LoopOpen | Instruction::LoopClose)
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// dbfi's in-memory code for an instruction.
///
/// Codes follow reverse ASCII order of the instruction characters:
/// `] [ > < . - , +` are `1 2 3 4 5 6 7 8`.
pub fn encode_instruction(i: Instruction) -> u8 {
    match i {
        Instruction::LoopClose => 1,
        Instruction::LoopOpen => 2,
        Instruction::MoveRight => 3,
        Instruction::MoveLeft => 4,
        Instruction::Output => 5,
        Instruction::Dec => 6,
        Instruction::Input => 7,
        Instruction::Inc => 8,
    }
}

/// Inverse of [`encode_instruction`]; `None` outside `1..=8`.
pub fn decode_instruction(code: u32) -> Option<Instruction> {
    Some(match code {
        1 => Instruction::LoopClose,
        2 => Instruction::LoopOpen,
        3 => Instruction::MoveRight,
        4 => Instruction::MoveLeft,
        5 => Instruction::Output,
        6 => Instruction::Dec,
        7 => Instruction::Input,
        8 => Instruction::Inc,
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    /// `offset` is the byte offset of the first `]` without a partner, or of
    /// the outermost `[` left open at the end of the code part.
    #[error("unbalanced brackets at offset {offset}")]
    UnbalancedBrackets { offset: usize },
}

/// A parsed dbfi-BF program: the code part as instructions plus the raw data
/// part that followed the first `!`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    tokens: Vec<Instruction>,
    jumps: Vec<Option<usize>>,
    data: Vec<u8>,
    source_map: Vec<usize>,
    max_depth: usize,
}

/// Parse a dbfi-BF stream.
///
/// Everything before the first `!` is code; characters other than the eight
/// instructions are comments. Everything after it is data, kept verbatim. A
/// stream without `!` is all code with empty data.
pub fn parse(source: impl AsRef<[u8]>) -> Result<Program, ParseError> {
    let source = source.as_ref();
    let (code, data) = match source.iter().position(|&b| b == SEPARATOR) {
        Some(at) => (&source[..at], &source[at + 1..]),
        None => (source, &[][..]),
    };

    let mut tokens = Vec::new();
    let mut source_map = Vec::new();
    let mut jumps = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    let mut max_depth = 0;

    for (offset, &b) in code.iter().enumerate() {
        let Some(instr) = Instruction::from_byte(b) else {
            continue;
        };
        let index = tokens.len();
        tokens.push(instr);
        source_map.push(offset);
        jumps.push(None);
        match instr {
            Instruction::LoopOpen => {
                open.push(index);
                max_depth = max_depth.max(open.len());
            }
            Instruction::LoopClose => {
                let partner = open
                    .pop()
                    .ok_or(ParseError::UnbalancedBrackets { offset })?;
                jumps[partner] = Some(index);
                jumps[index] = Some(partner);
            }
            _ => {}
        }
    }

    if let Some(&outermost) = open.first() {
        return Err(ParseError::UnbalancedBrackets {
            offset: source_map[outermost],
        });
    }

    Ok(Program {
        tokens,
        jumps,
        data: data.to_vec(),
        source_map,
        max_depth,
    })
}

impl Program {
    pub fn tokens(&self) -> &[Instruction] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Matching bracket of the bracket token at `index`.
    pub fn partner(&self, index: usize) -> Option<usize> {
        self.jumps.get(index).copied().flatten()
    }

    /// All `(open, close)` bracket pairs, ordered by the open index.
    pub fn bracket_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.jumps
            .iter()
            .enumerate()
            .filter_map(|(i, j)| j.filter(|&j| i < j).map(|j| (i, j)))
    }

    pub fn data_segment(&self) -> &[u8] {
        &self.data
    }

    /// Byte offset into the original source of each token.
    pub fn source_map(&self) -> &[usize] {
        &self.source_map
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    /// Token indices of the loops that are not nested inside another loop.
    pub fn top_level_loops(&self) -> Vec<(usize, usize)> {
        let mut loops = Vec::new();
        let mut i = 0;
        while i < self.tokens.len() {
            if let (Instruction::LoopOpen, Some(close)) = (self.tokens[i], self.partner(i)) {
                loops.push((i, close));
                i = close;
            }
            i += 1;
        }
        loops
    }

    /// The code part re-serialized without comments.
    pub fn code_string(&self) -> String {
        self.tokens.iter().map(|t| t.to_char()).collect()
    }

    /// `code ! data`, the form accepted by [`parse`].
    pub fn to_source(&self) -> Vec<u8> {
        let mut out = self.code_string().into_bytes();
        out.push(SEPARATOR);
        out.extend_from_slice(&self.data);
        out
    }

    pub fn codes(&self) -> Vec<u8> {
        self.tokens.iter().copied().map(encode_instruction).collect()
    }
}

/// Maximum bracket nesting depth of a program.
pub fn nesting_depth(p: &Program) -> usize {
    p.max_depth()
}

/// Bits per tape cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CellWidth {
    #[default]
    W8,
    W16,
    W32,
}

impl CellWidth {
    pub fn bits(self) -> u32 {
        match self {
            CellWidth::W8 => 8,
            CellWidth::W16 => 16,
            CellWidth::W32 => 32,
        }
    }

    pub fn from_bits(bits: u32) -> Option<CellWidth> {
        match bits {
            8 => Some(CellWidth::W8),
            16 => Some(CellWidth::W16),
            32 => Some(CellWidth::W32),
            _ => None,
        }
    }

    /// Largest cell value, also usable as a wrapping mask.
    pub fn mask(self) -> u32 {
        match self {
            CellWidth::W8 => 0xff,
            CellWidth::W16 => 0xffff,
            CellWidth::W32 => u32::MAX,
        }
    }
}

/// What happens when the head moves left of cell 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum UnderflowPolicy {
    /// Run error.
    #[default]
    Strict,
    /// The tape extends to the left; negative cell indices are valid.
    Sparse,
}

/// Named semantics profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Profile {
    /// Byte cells, strict left edge.
    #[default]
    Portable,
    /// The C++ reference interpreter: byte cells, sparse tape in both directions.
    Appendix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EngineConfig {
    pub cell_width: CellWidth,
    pub underflow: UnderflowPolicy,
    /// Maximum number of executed instructions.
    pub step_limit: Option<u64>,
    /// Maximum number of distinct cells the head may visit.
    pub tape_limit: Option<u64>,
}

impl EngineConfig {
    pub fn portable() -> Self {
        Self::default()
    }

    pub fn appendix() -> Self {
        EngineConfig {
            underflow: UnderflowPolicy::Sparse,
            ..Self::default()
        }
    }

    pub fn from_profile(profile: Profile) -> Self {
        match profile {
            Profile::Portable => Self::portable(),
            Profile::Appendix => Self::appendix(),
        }
    }

    pub fn with_step_limit(mut self, limit: u64) -> Self {
        self.step_limit = Some(limit);
        self
    }

    pub fn with_tape_limit(mut self, limit: u64) -> Self {
        self.tape_limit = Some(limit);
        self
    }

    pub fn with_cell_width(mut self, width: CellWidth) -> Self {
        self.cell_width = width;
        self
    }
}
