//! Reference stepping interpreter.
//!
//! One call to [`step`] executes exactly one instruction. Loop tests count as
//! executed instructions, so `[-]` on a cell holding `v > 0` takes `1 + 2v`
//! steps.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::lang::{EngineConfig, Instruction, Program, UnderflowPolicy};
use crate::tape::{Tape, TapeWindow};

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HaltReason {
    Completed,
    StepLimit,
    TapeLimit,
    Underflow,
}

impl HaltReason {
    pub fn is_budget(self) -> bool {
        matches!(self, HaltReason::StepLimit | HaltReason::TapeLimit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Running,
    Halted,
    /// Never `Completed`.
    Error(HaltReason),
}

/// Complete state of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineState {
    pub tape: Tape,
    pub head: i64,
    pub ip: usize,
    pub input: Vec<u8>,
    pub input_cursor: usize,
    pub output: Vec<u8>,
    pub steps: u64,
    pub status: Status,
    visited_low: i64,
    visited_high: i64,
}

impl MachineState {
    pub fn new(input: impl Into<Vec<u8>>) -> Self {
        MachineState {
            tape: Tape::new(),
            head: 0,
            ip: 0,
            input: input.into(),
            input_cursor: 0,
            output: Vec::new(),
            steps: 0,
            status: Status::Running,
            visited_low: 0,
            visited_high: 0,
        }
    }

    pub fn cell(&self) -> u32 {
        self.tape.get(self.head)
    }

    /// Moves the head without executing anything, marking the cell visited.
    pub fn set_head(&mut self, head: i64) {
        self.head = head;
        self.visited_low = self.visited_low.min(head);
        self.visited_high = self.visited_high.max(head);
    }

    /// Inclusive range of cell indices the head has visited.
    pub fn visited(&self) -> (i64, i64) {
        (self.visited_low, self.visited_high)
    }

    /// Cells in the visited range.
    pub fn touched_cells(&self) -> TapeWindow {
        TapeWindow {
            start: self.visited_low,
            cells: self.tape.window(self.visited_low, self.visited_high + 1),
        }
    }

    pub fn is_running(&self) -> bool {
        self.status == Status::Running
    }

    pub fn halt_reason(&self) -> Option<HaltReason> {
        match self.status {
            Status::Running => None,
            Status::Halted => Some(HaltReason::Completed),
            Status::Error(kind) => Some(kind),
        }
    }

    /// Fails with `StepLimit` if one more step would exceed the budget.
    pub(crate) fn charge(&self, config: &EngineConfig) -> Result<(), HaltReason> {
        match config.step_limit {
            Some(limit) if self.steps >= limit => Err(HaltReason::StepLimit),
            _ => Ok(()),
        }
    }

    /// Applies a non-bracket instruction to the data side of the machine.
    /// On error nothing changes.
    pub(crate) fn apply(
        &mut self,
        instr: Instruction,
        config: &EngineConfig,
    ) -> Result<(), HaltReason> {
        let mask = config.cell_width.mask();
        match instr {
            Instruction::MoveRight => self.move_to(self.head + 1, config)?,
            Instruction::MoveLeft => {
                if self.head == 0 && config.underflow == UnderflowPolicy::Strict {
                    return Err(HaltReason::Underflow);
                }
                self.move_to(self.head - 1, config)?;
            }
            Instruction::Inc => {
                let c = self.tape.get_mut(self.head);
                *c = c.wrapping_add(1) & mask;
            }
            Instruction::Dec => {
                let c = self.tape.get_mut(self.head);
                *c = c.wrapping_sub(1) & mask;
            }
            Instruction::Output => {
                self.output.push(self.tape.get(self.head) as u8);
            }
            Instruction::Input => {
                // Exhausted input leaves the cell as it was.
                if let Some(&b) = self.input.get(self.input_cursor) {
                    self.input_cursor += 1;
                    self.tape.set(self.head, b as u32);
                }
            }
            Instruction::LoopOpen | Instruction::LoopClose => {
                unreachable!("brackets are control flow")
            }
        }
        Ok(())
    }

    fn move_to(&mut self, head: i64, config: &EngineConfig) -> Result<(), HaltReason> {
        if let Some(limit) = config.tape_limit {
            let low = self.visited_low.min(head);
            let high = self.visited_high.max(head);
            if (high - low + 1) as u64 > limit {
                return Err(HaltReason::TapeLimit);
            }
        }
        self.set_head(head);
        Ok(())
    }
}

/// Executes one instruction. Does nothing unless the state is running.
pub fn step(state: &mut MachineState, program: &Program, config: &EngineConfig) {
    if state.status != Status::Running {
        return;
    }
    let tokens = program.tokens();
    if state.ip >= tokens.len() {
        state.status = Status::Halted;
        return;
    }
    if let Err(kind) = state.charge(config) {
        state.status = Status::Error(kind);
        return;
    }
    let instr = tokens[state.ip];
    match instr {
        Instruction::LoopOpen => {
            state.ip = if state.cell() == 0 {
                partner(program, state.ip) + 1
            } else {
                state.ip + 1
            };
        }
        Instruction::LoopClose => {
            state.ip = if state.cell() != 0 {
                partner(program, state.ip) + 1
            } else {
                state.ip + 1
            };
        }
        _ => {
            if let Err(kind) = state.apply(instr, config) {
                state.status = Status::Error(kind);
                return;
            }
            state.ip += 1;
        }
    }
    state.steps += 1;
    if state.ip >= tokens.len() {
        state.status = Status::Halted;
    }
}

fn partner(program: &Program, ip: usize) -> usize {
    program
        .partner(ip)
        .expect("parsed programs have matched brackets")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionOutcome {
    pub output: Vec<u8>,
    pub steps: u64,
    pub halt_reason: HaltReason,
    pub final_state: Option<MachineState>,
}

impl ExecutionOutcome {
    pub fn from_state(state: MachineState) -> Self {
        ExecutionOutcome {
            output: state.output.clone(),
            steps: state.steps,
            halt_reason: state
                .halt_reason()
                .expect("outcomes are built from stopped machines"),
            final_state: Some(state),
        }
    }

    pub fn completed(&self) -> bool {
        self.halt_reason == HaltReason::Completed
    }
}

/// Runs to completion or error. `data` overrides the program's own data
/// segment when given.
pub fn run(program: &Program, data: Option<&[u8]>, config: &EngineConfig) -> ExecutionOutcome {
    let mut state = MachineState::new(data.unwrap_or(program.data_segment()));
    while state.is_running() {
        step(&mut state, program, config);
    }
    ExecutionOutcome::from_state(state)
}

/// Which steps a traced run reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SnapshotPolicy {
    /// Every k-th step (steps 0, k, 2k, ...), without tape contents.
    EveryK(u64),
    /// Whenever the instruction pointer is on one of these token indices,
    /// before that token executes, with the allocated tape.
    AtIps(BTreeSet<usize>),
    /// Every step, with the allocated tape.
    Full,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    /// Steps executed before this event.
    pub step: u64,
    pub ip: usize,
    pub head: i64,
    pub instruction: Instruction,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tape: Option<TapeWindow>,
}

fn snapshot(state: &MachineState, instruction: Instruction, with_tape: bool) -> TraceEvent {
    TraceEvent {
        step: state.steps,
        ip: state.ip,
        head: state.head,
        instruction,
        tape: with_tape.then(|| {
            let lo = state.tape.low().min(state.visited_low);
            let hi = state.tape.high().max(state.visited_high + 1);
            TapeWindow {
                start: lo,
                cells: state.tape.window(lo, hi),
            }
        }),
    }
}

/// Like [`run`], handing each event to `observe` as it happens.
pub fn run_observed<F>(
    program: &Program,
    data: Option<&[u8]>,
    config: &EngineConfig,
    policy: &SnapshotPolicy,
    mut observe: F,
) -> ExecutionOutcome
where
    F: FnMut(&MachineState, TraceEvent),
{
    let mut state = MachineState::new(data.unwrap_or(program.data_segment()));
    let tokens = program.tokens();
    while state.is_running() {
        if let Some(&instr) = tokens.get(state.ip) {
            let event = match policy {
                SnapshotPolicy::EveryK(k) => {
                    (*k > 0 && state.steps.is_multiple_of(*k)).then(|| snapshot(&state, instr, false))
                }
                SnapshotPolicy::AtIps(ips) => {
                    ips.contains(&state.ip).then(|| snapshot(&state, instr, true))
                }
                SnapshotPolicy::Full => Some(snapshot(&state, instr, true)),
            };
            // A step that cannot run is not observed.
            if let Some(event) = event.filter(|_| state.charge(config).is_ok()) {
                observe(&state, event);
            }
        }
        step(&mut state, program, config);
    }
    ExecutionOutcome::from_state(state)
}

pub fn run_traced(
    program: &Program,
    data: Option<&[u8]>,
    config: &EngineConfig,
    policy: &SnapshotPolicy,
) -> (ExecutionOutcome, Vec<TraceEvent>) {
    let mut events = Vec::new();
    let outcome = run_observed(program, data, config, policy, |_, e| events.push(e));
    (outcome, events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse, CellWidth};

    fn portable() -> EngineConfig {
        EngineConfig::portable()
    }

    #[test]
    fn open_on_zero_jumps_past_partner() {
        let p = parse("[>>>+]+").unwrap();
        let mut s = MachineState::new(Vec::new());
        step(&mut s, &p, &portable());
        assert_eq!(s.ip, 6);
        assert_eq!(s.steps, 1);
    }

    #[test]
    fn inc_dec_wrap() {
        let p = parse("+").unwrap();
        let mut s = MachineState::new(Vec::new());
        s.tape.set(0, 97);
        step(&mut s, &p, &portable());
        assert_eq!(s.tape.get(0), 98);

        let mut s = MachineState::new(Vec::new());
        s.tape.set(0, 255);
        step(&mut s, &p, &portable());
        assert_eq!(s.tape.get(0), 0);

        let p = parse("-").unwrap();
        for width in [CellWidth::W8, CellWidth::W16, CellWidth::W32] {
            let mut s = MachineState::new(Vec::new());
            step(&mut s, &p, &portable().with_cell_width(width));
            assert_eq!(s.tape.get(0), width.mask());
        }
    }

    #[test]
    fn input_at_eof_keeps_cell() {
        let p = parse(",").unwrap();
        let mut s = MachineState::new(Vec::new());
        step(&mut s, &p, &portable());
        assert_eq!(s.tape.get(0), 0);
        assert_eq!(s.status, Status::Halted);

        let mut s = MachineState::new(Vec::new());
        s.tape.set(0, 42);
        step(&mut s, &p, &portable());
        assert_eq!(s.tape.get(0), 42);
    }

    #[test]
    fn eof_is_idempotent() {
        let once = run(&parse("+,.").unwrap(), Some(b""), &portable());
        let twice = run(&parse("+,,.").unwrap(), Some(b""), &portable());
        assert_eq!(once.output, twice.output);
        assert_eq!(
            once.final_state.unwrap().tape.get(0),
            twice.final_state.unwrap().tape.get(0)
        );
    }

    #[test]
    fn reference_examples() {
        let out = run(&parse(",+.!a").unwrap(), None, &portable());
        assert_eq!(out.output, b"b");
        assert_eq!(out.halt_reason, HaltReason::Completed);

        let out = run(&parse(",[>+>+<<-]>.>.!X").unwrap(), None, &portable());
        assert_eq!(out.output, b"XX");

        let out = run(&parse("a!").unwrap(), None, &portable());
        assert_eq!(out.output, b"");
        assert_eq!(out.steps, 0);
        assert!(out.completed());

        let out = run(&parse(",>,!ab").unwrap(), None, &portable());
        let s = out.final_state.unwrap();
        assert_eq!(s.tape.window(0, 4), vec![97, 98, 0, 0]);
        assert_eq!(s.head, 1);

        let quine = ">,[.>,]<[<]>[.>]!>,[.>,]<[<]>[.>]!";
        let out = run(&parse(quine).unwrap(), None, &portable());
        assert_eq!(out.output, quine.as_bytes());
    }

    #[test]
    fn strict_underflow_stops_at_the_offending_token() {
        let out = run(&parse("+<+").unwrap(), None, &portable());
        assert_eq!(out.halt_reason, HaltReason::Underflow);
        let s = out.final_state.unwrap();
        assert_eq!(s.ip, 1);
        assert_eq!(s.head, 0);
        assert_eq!(out.steps, 1);
    }

    #[test]
    fn sparse_allows_negative_cells() {
        let out = run(&parse("<+.").unwrap(), None, &EngineConfig::appendix());
        assert!(out.completed());
        assert_eq!(out.output, vec![1]);
        let s = out.final_state.unwrap();
        assert_eq!(s.head, -1);
        assert_eq!(s.tape.get(-1), 1);
    }

    #[test]
    fn limits() {
        let out = run(&parse("+[]").unwrap(), None, &portable().with_step_limit(100));
        assert_eq!(out.halt_reason, HaltReason::StepLimit);
        assert_eq!(out.steps, 100);

        // exactly enough budget still completes
        let out = run(&parse("+++").unwrap(), None, &portable().with_step_limit(3));
        assert!(out.completed());

        let out = run(&parse("+[>+]").unwrap(), None, &portable().with_tape_limit(10));
        assert_eq!(out.halt_reason, HaltReason::TapeLimit);
        assert_eq!(out.final_state.unwrap().visited(), (0, 9));
    }

    #[test]
    fn loop_step_accounting() {
        // '[' once, then '-' and ']' per iteration
        let out = run(&parse("+++++[-]").unwrap(), None, &portable());
        assert_eq!(out.steps, 5 + 1 + 2 * 5);
    }

    #[test]
    fn tracing_policies() {
        let p = parse("+-!").unwrap();
        let (out, events) = run_traced(&p, None, &portable(), &SnapshotPolicy::EveryK(1));
        assert_eq!(events.len(), 2);
        assert!(out.output.is_empty());

        let p = parse(",+.!a").unwrap();
        let (_, events) = run_traced(&p, None, &portable(), &SnapshotPolicy::AtIps([0].into()));
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].ip, 0);
        assert_eq!(events[0].instruction, Instruction::Input);
        assert!(events[0].tape.is_some());

        let (out, events) = run_traced(&p, None, &portable(), &SnapshotPolicy::Full);
        assert_eq!(events.len() as u64, out.steps);
        assert!(events.windows(2).all(|w| w[0].step <= w[1].step));
        assert_eq!(events[2].tape.as_ref().unwrap().cells[0], 98);
    }

    #[test]
    fn tracing_is_observation_only() {
        let p = parse(",[.[-],]!abc").unwrap();
        let plain = run(&p, None, &portable());
        let (traced, _) = run_traced(&p, None, &portable(), &SnapshotPolicy::Full);
        assert_eq!(plain, traced);
    }
}
