//! Linear bytecode with coalesced runs and precomputed jumps.
//!
//! Every op remembers the span of source tokens it came from. Steps are
//! charged in source-token units, so a completed run reports the same step
//! count as the stepping engine. When an op could hit a budget, an underflow
//! or the tape limit part way through its span, the span is replayed one
//! token at a time instead, which makes errors land on the same token with
//! the same state as in [`crate::direct`].

use std::fmt::{self, Write as _};
use std::ops::Range;

use crate::direct::{ExecutionOutcome, HaltReason, MachineState, Status};
use crate::lang::{EngineConfig, Instruction, Program, UnderflowPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    /// Net head movement of a run of `<`/`>`, with the lowest and highest
    /// offset reached inside the run.
    Move { delta: i32, low: i32, high: i32 },
    /// Net change of a run of `+`/`-`, applied modulo the cell width.
    Add(i32),
    In,
    Out,
    /// `[-]` (`dec`) or `[+]`.
    SetZero { dec: bool },
    /// Jump to the op index if the cell is zero.
    JumpIfZero(usize),
    /// Jump to the op index if the cell is nonzero.
    JumpIfNonzero(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bytecode {
    ops: Vec<Op>,
    spans: Vec<Range<usize>>,
    tokens: Vec<Instruction>,
    data: Vec<u8>,
}

impl Bytecode {
    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    /// Source token span of each op.
    pub fn spans(&self) -> &[Range<usize>] {
        &self.spans
    }

    pub fn data_segment(&self) -> &[u8] {
        &self.data
    }

    /// One op per line: `MOVE +3`, `ADD -1`, `SETZERO`, `JZ 17`, ...
    pub fn disassemble(&self) -> String {
        let mut out = String::new();
        for op in &self.ops {
            writeln!(out, "{op}").unwrap();
        }
        out
    }

    /// A canonical token stream with the same behavior.
    pub fn decompile(&self) -> Vec<Instruction> {
        use Instruction::*;
        let mut out = Vec::new();
        let repeat = |out: &mut Vec<Instruction>, i, n: i32| {
            out.extend(std::iter::repeat_n(i, n.unsigned_abs() as usize))
        };
        for op in &self.ops {
            match *op {
                Op::Move { delta, low, high } => {
                    repeat(&mut out, MoveLeft, low);
                    repeat(&mut out, MoveRight, high - low);
                    repeat(&mut out, MoveLeft, high - delta);
                }
                Op::Add(0) => out.extend([Inc, Dec]),
                Op::Add(n) => repeat(&mut out, if n < 0 { Dec } else { Inc }, n),
                Op::In => out.push(Input),
                Op::Out => out.push(Output),
                Op::SetZero { dec } => out.extend([LoopOpen, if dec { Dec } else { Inc }, LoopClose]),
                Op::JumpIfZero(_) => out.push(LoopOpen),
                Op::JumpIfNonzero(_) => out.push(LoopClose),
            }
        }
        out
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Move { delta, .. } => write!(f, "MOVE {delta:+}"),
            Op::Add(n) => write!(f, "ADD {n:+}"),
            Op::In => f.write_str("IN"),
            Op::Out => f.write_str("OUT"),
            Op::SetZero { .. } => f.write_str("SETZERO"),
            Op::JumpIfZero(t) => write!(f, "JZ {t}"),
            Op::JumpIfNonzero(t) => write!(f, "JNZ {t}"),
        }
    }
}

pub fn compile(program: &Program) -> Bytecode {
    use Instruction::*;
    let tokens = program.tokens();
    let mut ops = Vec::new();
    let mut spans = Vec::new();
    let mut open = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let start = i;
        match tokens[i] {
            MoveRight | MoveLeft => {
                let (mut delta, mut low, mut high) = (0i32, 0i32, 0i32);
                while let Some(&t @ (MoveRight | MoveLeft)) = tokens.get(i) {
                    delta += if t == MoveRight { 1 } else { -1 };
                    low = low.min(delta);
                    high = high.max(delta);
                    i += 1;
                }
                ops.push(Op::Move { delta, low, high });
            }
            Inc | Dec => {
                let mut n = 0i32;
                while let Some(&t @ (Inc | Dec)) = tokens.get(i) {
                    n += if t == Inc { 1 } else { -1 };
                    i += 1;
                }
                ops.push(Op::Add(n));
            }
            Input => {
                ops.push(Op::In);
                i += 1;
            }
            Output => {
                ops.push(Op::Out);
                i += 1;
            }
            LoopOpen => match tokens.get(i + 1..i + 3) {
                Some([body @ (Inc | Dec), LoopClose]) => {
                    ops.push(Op::SetZero { dec: *body == Dec });
                    i += 3;
                }
                _ => {
                    open.push(ops.len());
                    ops.push(Op::JumpIfZero(usize::MAX));
                    i += 1;
                }
            },
            LoopClose => {
                let at = open.pop().expect("parsed programs have matched brackets");
                let here = ops.len();
                ops[at] = Op::JumpIfZero(here + 1);
                ops.push(Op::JumpIfNonzero(at + 1));
                i += 1;
            }
        }
        spans.push(start..i);
    }
    Bytecode {
        ops,
        spans,
        tokens: tokens.to_vec(),
        data: program.data_segment().to_vec(),
    }
}

/// Runs compiled code. `data` overrides the program's own data segment.
pub fn execute(bc: &Bytecode, data: Option<&[u8]>, config: &EngineConfig) -> ExecutionOutcome {
    let mut st = MachineState::new(data.unwrap_or(&bc.data));
    execute_state(bc, &mut st, config);
    ExecutionOutcome::from_state(st)
}

fn execute_state(bc: &Bytecode, st: &mut MachineState, config: &EngineConfig) {
    let mask = config.cell_width.mask();
    let limit = config.step_limit.unwrap_or(u64::MAX);
    let strict = config.underflow == UnderflowPolicy::Strict;
    let ops = &bc.ops;
    let mut pc = 0;
    let mut p = st.tape.ensure(st.head);

    while let Some(&op) = ops.get(pc) {
        let span = &bc.spans[pc];
        match op {
            Op::Move { delta, low, high } => {
                let cost = span.len() as u64;
                let (vlow, vhigh) = st.visited();
                let over_tape = config.tape_limit.is_some_and(|lim| {
                    let lo = vlow.min(st.head + low as i64);
                    let hi = vhigh.max(st.head + high as i64);
                    (hi - lo + 1) as u64 > lim
                });
                if over_tape || (strict && st.head + (low as i64) < 0) || st.steps + cost > limit {
                    if let Err(kind) = replay(bc, span.clone(), st, config) {
                        st.status = Status::Error(kind);
                        return;
                    }
                } else {
                    let h = st.head;
                    st.set_head(h + low as i64);
                    st.set_head(h + high as i64);
                    st.head = h + delta as i64;
                    st.steps += cost;
                }
                p = st.tape.ensure(st.head);
                pc += 1;
            }
            Op::Add(n) => {
                let cost = span.len() as u64;
                if st.steps + cost > limit {
                    if let Err(kind) = replay(bc, span.clone(), st, config) {
                        st.status = Status::Error(kind);
                        return;
                    }
                } else {
                    let c = &mut st.tape.raw_mut()[p];
                    *c = c.wrapping_add(n as u32) & mask;
                    st.steps += cost;
                }
                pc += 1;
            }
            Op::SetZero { dec } => {
                let v = st.tape.raw_mut()[p];
                let cost = if v == 0 {
                    1
                } else {
                    let iterations = if dec { v as u64 } else { mask as u64 + 1 - v as u64 };
                    1 + 2 * iterations
                };
                if st.steps + cost > limit {
                    if let Err(kind) = replay(bc, span.clone(), st, config) {
                        st.status = Status::Error(kind);
                        return;
                    }
                } else {
                    st.tape.raw_mut()[p] = 0;
                    st.steps += cost;
                }
                pc += 1;
            }
            _ => {
                if st.steps >= limit {
                    st.ip = span.start;
                    st.status = Status::Error(HaltReason::StepLimit);
                    return;
                }
                st.steps += 1;
                let cell = st.tape.raw_mut()[p];
                pc = match op {
                    Op::In => {
                        if let Some(&b) = st.input.get(st.input_cursor) {
                            st.input_cursor += 1;
                            st.tape.raw_mut()[p] = b as u32;
                        }
                        pc + 1
                    }
                    Op::Out => {
                        st.output.push(cell as u8);
                        pc + 1
                    }
                    Op::JumpIfZero(target) if cell == 0 => target,
                    Op::JumpIfNonzero(target) if cell != 0 => target,
                    _ => pc + 1,
                };
            }
        }
    }
    st.ip = bc.tokens.len();
    st.status = Status::Halted;
}

/// Executes the tokens of one op's span one at a time, with local bracket
/// matching. Leaves `st.ip` on the failing token on error.
fn replay(
    bc: &Bytecode,
    span: Range<usize>,
    st: &mut MachineState,
    config: &EngineConfig,
) -> Result<(), HaltReason> {
    let tokens = &bc.tokens[span.clone()];
    let mut i = 0;
    while i < tokens.len() {
        st.ip = span.start + i;
        st.charge(config)?;
        let t = tokens[i];
        i = match t {
            Instruction::LoopOpen if st.cell() == 0 => local_partner(tokens, i) + 1,
            Instruction::LoopClose if st.cell() != 0 => local_partner(tokens, i) + 1,
            Instruction::LoopOpen | Instruction::LoopClose => i + 1,
            _ => {
                st.apply(t, config)?;
                i + 1
            }
        };
        st.steps += 1;
    }
    st.ip = span.end;
    Ok(())
}

fn local_partner(tokens: &[Instruction], at: usize) -> usize {
    let mut depth = 0i32;
    if tokens[at] == Instruction::LoopOpen {
        for (j, t) in tokens.iter().enumerate().skip(at) {
            depth += bracket_weight(*t);
            if depth == 0 {
                return j;
            }
        }
    } else {
        for j in (0..=at).rev() {
            depth += bracket_weight(tokens[j]);
            if depth == 0 {
                return j;
            }
        }
    }
    unreachable!("spans with brackets are balanced")
}

fn bracket_weight(t: Instruction) -> i32 {
    match t {
        Instruction::LoopOpen => 1,
        Instruction::LoopClose => -1,
        _ => 0,
    }
}
