//! The dbfi self-interpreter: tower composition, tower execution, and a
//! cosimulation that checks dbfi's documented tape layout against a shadow
//! interpreter at every instruction fetch.
//!
//! dbfi keeps the simulated program on its own tape as instruction codes
//! (see [`crate::lang::encode_instruction`]). A pair of zero cells sits just
//! left of the next code to execute, another pair follows the last code, and
//! then every simulated cell occupies two host cells: a marker (2 up to and
//! including the simulated head, 0 after it) and the value.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bytecode;
use crate::direct::{self, ExecutionOutcome, HaltReason, MachineState, SnapshotPolicy};
use crate::lang::{parse, EngineConfig, ParseError, Program, UnderflowPolicy, SEPARATOR};

/// dbfi, verbatim.
pub const DBFI_SOURCE: &str = r">>>+[[-]>>[-]++>+>+++++++[<++++>>++<-]++>>+>+>+++++[>
++>++++++<<-]+>>>,<++[[>[->>]<[>>]<<-]<[<]<+>>[>]>[<+
>-[[<+>-]>]<[[[-]<]++<-[<+++++++++>[<->-]>>]>>]]<<]<]
<
[[<]>[[>]>>[>>]+[<<]<[<]<+>>-]>[>]+[->>]<<<<[[<<]<[<]
+<<[+>+<<-[>-->+<<-[>+<[>>+<<-]]]>[<+>-]<]++>>-->[>]>
>[>>]]<<[>>+<[[<]<]>[[<<]<[<]+[-<+>>-[<<+>++>-[<->[<<
+>>-]]]<[>+<-]>]>[>]>]>[>>]>>]<<[>>+>>+>>]<<[->>>>>>>
>]<<[>.>>>>>>>]<<[>->>>>>]<<[>,>>>]<<[>+>]<<[+<<]<]";

/// Which engine hosts the bottom of a tower.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EngineKind {
    Direct,
    #[default]
    Bytecode,
}

/// A program with its data, run `levels` interpreters deep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerJob {
    /// Code part only; must not contain `!`.
    pub program_source: Vec<u8>,
    pub data: Vec<u8>,
    pub levels: u32,
    pub engine: EngineKind,
    pub config: EngineConfig,
    /// Overrides `config.step_limit` when set.
    pub step_budget: Option<u64>,
}

impl TowerJob {
    /// Splits a `code!data` stream at its first `!`.
    pub fn from_stream(stream: &[u8], levels: u32) -> Self {
        let (code, data) = match stream.iter().position(|&b| b == SEPARATOR) {
            Some(at) => (&stream[..at], &stream[at + 1..]),
            None => (stream, &[][..]),
        };
        TowerJob {
            program_source: code.to_vec(),
            data: data.to_vec(),
            levels,
            engine: EngineKind::default(),
            config: EngineConfig::portable(),
            step_budget: None,
        }
    }

    pub fn with_engine(mut self, engine: EngineKind) -> Self {
        self.engine = engine;
        self
    }

    pub fn with_config(mut self, config: EngineConfig) -> Self {
        self.config = config;
        self
    }

    pub fn with_step_budget(mut self, budget: u64) -> Self {
        self.step_budget = Some(budget);
        self
    }

    fn effective_config(&self) -> EngineConfig {
        EngineConfig {
            step_limit: self.step_budget.or(self.config.step_limit),
            ..self.config
        }
    }
}

/// The code run by the host engine and the single input stream it reads.
///
/// At level 0 this is the job itself. At level `n` the host runs dbfi, and
/// the stream holds `n - 1` further copies of dbfi, each followed by `!`,
/// then the program, `!`, and its data.
pub fn compose_tower(job: &TowerJob) -> (Vec<u8>, Vec<u8>) {
    if job.levels == 0 {
        return (job.program_source.clone(), job.data.clone());
    }
    let mut input = Vec::new();
    for _ in 1..job.levels {
        input.extend_from_slice(DBFI_SOURCE.as_bytes());
        input.push(SEPARATOR);
    }
    input.extend_from_slice(&job.program_source);
    input.push(SEPARATOR);
    input.extend_from_slice(&job.data);
    (DBFI_SOURCE.as_bytes().to_vec(), input)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TowerError {
    #[error("program does not parse: {0}")]
    Parse(#[from] ParseError),
}

pub fn run_tower(job: &TowerJob) -> Result<ExecutionOutcome, TowerError> {
    let (code, input) = compose_tower(job);
    let program = parse(&code)?;
    let config = job.effective_config();
    let outcome = match job.engine {
        EngineKind::Direct => direct::run(&program, Some(&input), &config),
        EngineKind::Bytecode => {
            bytecode::execute(&bytecode::compile(&program), Some(&input), &config)
        }
    };
    Ok(outcome)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("expected exactly two top-level loops in the interpreter, found {found}")]
pub struct StructureMismatch {
    pub found: usize,
}

/// Token index of the `[` that opens dbfi's main execute loop: the second
/// of its two top-level loops (the first reads the program).
pub fn locate_fetch_boundary(dbfi: &Program) -> Result<usize, StructureMismatch> {
    fetch_loop(dbfi).map(|(open, _)| open)
}

/// Open and close token indices of the main execute loop.
///
/// Control re-enters the loop through its `]`, which jumps to the token
/// after the `[`, so a tracer needs both indices to see every fetch.
pub fn fetch_loop(dbfi: &Program) -> Result<(usize, usize), StructureMismatch> {
    match dbfi.top_level_loops()[..] {
        [_, main] => Ok(main),
        ref loops => Err(StructureMismatch { found: loops.len() }),
    }
}

/// The simulated program's state as dbfi represents it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShadowState {
    /// Instruction codes `1..=8`.
    pub codes: Vec<u8>,
    pub sim_ip: usize,
    /// Simulated cells `0..=R`, `R` being the larger of `sim_head` and the
    /// last nonzero cell.
    pub sim_cells: Vec<u32>,
    pub sim_head: usize,
    /// Instructions executed so far. Not visible in a tape layout; decoding
    /// leaves it at 0.
    pub executed_count: u64,
}

impl ShadowState {
    pub fn new(codes: Vec<u8>, sim_ip: usize, mut sim_cells: Vec<u32>, sim_head: usize) -> Self {
        let last = sim_cells.iter().rposition(|&c| c != 0).unwrap_or(0);
        sim_cells.resize(last.max(sim_head) + 1, 0);
        ShadowState {
            codes,
            sim_ip,
            sim_cells,
            sim_head,
            executed_count: 0,
        }
    }

    /// State of a program being run by the stepping engine, normalized.
    pub fn from_machine(codes: &[u8], machine: &MachineState) -> Self {
        let head = usize::try_from(machine.head).expect("simulated head left of cell 0");
        let mut s = ShadowState::new(
            codes.to_vec(),
            machine.ip,
            machine.tape.nonnegative_prefix(),
            head,
        );
        s.executed_count = machine.steps;
        s
    }

    /// Equal as tape layouts: everything except `executed_count`.
    pub fn same_layout(&self, other: &ShadowState) -> bool {
        self.codes == other.codes
            && self.sim_ip == other.sim_ip
            && self.sim_cells == other.sim_cells
            && self.sim_head == other.sim_head
    }

    fn describe_difference(&self, other: &ShadowState) -> String {
        let mut parts = Vec::new();
        if self.codes != other.codes {
            parts.push(format!("codes {:?} != {:?}", self.codes, other.codes));
        }
        if self.sim_ip != other.sim_ip {
            parts.push(format!("sim_ip {} != {}", self.sim_ip, other.sim_ip));
        }
        if self.sim_head != other.sim_head {
            parts.push(format!("sim_head {} != {}", self.sim_head, other.sim_head));
        }
        if self.sim_cells != other.sim_cells {
            parts.push(format!("sim_cells {:?} != {:?}", self.sim_cells, other.sim_cells));
        }
        parts.join("; ")
    }
}

/// The tape prefix dbfi is expected to hold for a shadow state. All cells
/// past the prefix are zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutPrediction {
    pub cells: Vec<u32>,
}

pub fn predict_layout(s: &ShadowState) -> LayoutPrediction {
    let codes = s.codes.iter().map(|&c| c as u32);
    let mut cells: Vec<u32> = codes.clone().take(s.sim_ip).collect();
    cells.extend([0, 0]);
    cells.extend(codes.skip(s.sim_ip));
    cells.extend([0, 0]);
    for (j, &v) in s.sim_cells.iter().enumerate() {
        cells.push(if j <= s.sim_head { 2 } else { 0 });
        cells.push(v);
    }
    LayoutPrediction { cells }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum DecodeError {
    #[error("cell {at} holds {value}, not an instruction code")]
    BadCode { at: usize, value: u32 },
    #[error("missing zero pair at cell {at}")]
    MissingZeroPair { at: usize },
    #[error("marker cell {at} holds {value}")]
    BadMarker { at: usize, value: u32 },
    #[error("marker 2 at cell {at} follows a 0 marker")]
    MarkerOrder { at: usize },
    #[error("no simulated cell is marked as the head")]
    NoHead,
    #[error("host head at {head}, expected {expected}")]
    HeadMisplaced { head: i64, expected: i64 },
}

/// Reads a dbfi tape (cells from index 0) taken at a fetch boundary back into
/// the simulated program state. At a fetch boundary the host head rests on
/// the cell just left of the separating zero pair.
pub fn decode_layout(tape: &[u32], head: i64) -> Result<ShadowState, DecodeError> {
    let cell = |i: usize| tape.get(i).copied().unwrap_or(0);
    let read_codes = |mut i: usize| -> Result<(Vec<u8>, usize), DecodeError> {
        let mut codes = Vec::new();
        loop {
            match cell(i) {
                0 => return Ok((codes, i)),
                v @ 1..=8 => codes.push(v as u8),
                value => return Err(DecodeError::BadCode { at: i, value }),
            }
            i += 1;
        }
    };
    let zero_pair = |i: usize| -> Result<usize, DecodeError> {
        if cell(i) == 0 && cell(i + 1) == 0 {
            Ok(i + 2)
        } else {
            Err(DecodeError::MissingZeroPair { at: i })
        }
    };

    let (mut codes, i) = read_codes(0)?;
    let sim_ip = codes.len();
    let i = zero_pair(i)?;
    let (rest, i) = read_codes(i)?;
    codes.extend(rest);
    let expected = codes.len() as i64 + 1;
    let data_start = zero_pair(i)?;

    let mut values = Vec::new();
    let mut marked = 0;
    let mut j = 0;
    while data_start + 2 * j < tape.len() {
        let at = data_start + 2 * j;
        match cell(at) {
            2 if marked == j => marked += 1,
            2 => return Err(DecodeError::MarkerOrder { at }),
            0 => {}
            value => return Err(DecodeError::BadMarker { at, value }),
        }
        values.push(cell(at + 1));
        j += 1;
    }
    if marked == 0 {
        return Err(DecodeError::NoHead);
    }
    if head != expected {
        return Err(DecodeError::HeadMisplaced { head, expected });
    }
    Ok(ShadowState::new(codes, sim_ip, values, marked - 1))
}

/// Per-boundary result of a cosimulation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    LayoutMismatch { diff: String },
    ChainOverrun,
    Undecodable { error: DecodeError },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryRecord {
    pub boundary_no: u64,
    pub sim_ip: usize,
    pub sim_head: usize,
    /// Shadow instructions executed to catch up with this boundary.
    pub shadow_steps: u32,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosimSummary {
    pub boundaries: u64,
    pub mismatches: u64,
    pub chain_overruns: u64,
    pub max_shadow_steps: u32,
    pub output_matches: bool,
    pub host_halt: HaltReason,
    pub host_steps: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosimReport {
    pub records: Vec<BoundaryRecord>,
    pub summary: CosimSummary,
    /// Simulated state decoded at the last boundary.
    pub final_layout: Option<ShadowState>,
    /// The first boundary whose decoded state had `sim_ip` equal to each
    /// value, for inspecting particular instructions.
    pub layouts_by_ip: Vec<(usize, ShadowState)>,
    pub level0_output: Vec<u8>,
    pub tower_output: Vec<u8>,
}

impl CosimReport {
    /// Every boundary passed, the host finished and the outputs agree.
    pub fn is_clean(&self) -> bool {
        self.summary.mismatches == 0
            && self.summary.chain_overruns == 0
            && self.summary.output_matches
            && self.summary.host_halt == HaltReason::Completed
    }

    pub fn layout_at_ip(&self, sim_ip: usize) -> Option<&ShadowState> {
        self.layouts_by_ip
            .iter()
            .find(|(ip, _)| *ip == sim_ip)
            .map(|(_, s)| s)
    }

    /// One JSON record per boundary, then one summary record.
    pub fn to_json_lines(&self) -> String {
        #[derive(Serialize)]
        #[serde(tag = "record", rename_all = "snake_case")]
        enum Line<'a> {
            Boundary(&'a BoundaryRecord),
            Summary(&'a CosimSummary),
        }
        let mut out = String::new();
        for r in &self.records {
            out += &serde_json::to_string(&Line::Boundary(r)).expect("records serialize");
            out.push('\n');
        }
        out += &serde_json::to_string(&Line::Summary(&self.summary)).expect("records serialize");
        out.push('\n');
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CosimError {
    #[error("program does not parse: {0}")]
    Parse(#[from] ParseError),
    #[error("program source contains '!'; pass data separately")]
    SeparatorInProgram,
    #[error("cosimulation needs a program that completes at level 0 under the strict profile; it stopped with {0:?}")]
    UndefinedAtLevel0(HaltReason),
    #[error("interpreter does not parse: {0}")]
    InterpreterParse(ParseError),
    #[error(transparent)]
    Structure(#[from] StructureMismatch),
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => f.write_str("pass"),
            Verdict::LayoutMismatch { diff } => write!(f, "layout mismatch: {diff}"),
            Verdict::ChainOverrun => f.write_str("chain overrun"),
            Verdict::Undecodable { error } => write!(f, "undecodable: {error}"),
        }
    }
}

/// Most shadow instructions allowed between two fetch boundaries.
pub const MAX_CHAIN: u32 = 2;

/// Runs the program under dbfi and checks the layout at every fetch boundary.
pub fn cosimulate(
    program_source: &[u8],
    data: &[u8],
    config: &EngineConfig,
) -> Result<CosimReport, CosimError> {
    let dbfi = parse(DBFI_SOURCE).map_err(CosimError::InterpreterParse)?;
    cosimulate_with(&dbfi, program_source, data, config)
}

/// [`cosimulate`] against an arbitrary dbfi-like interpreter.
pub fn cosimulate_with(
    interpreter: &Program,
    program_source: &[u8],
    data: &[u8],
    config: &EngineConfig,
) -> Result<CosimReport, CosimError> {
    let program = parse(program_source)?;
    if program_source.contains(&SEPARATOR) {
        return Err(CosimError::SeparatorInProgram);
    }
    let strict = EngineConfig {
        underflow: UnderflowPolicy::Strict,
        ..*config
    };
    let level0 = direct::run(&program, Some(data), &strict);
    if !level0.completed() {
        return Err(CosimError::UndefinedAtLevel0(level0.halt_reason));
    }
    let (open, close) = fetch_loop(interpreter)?;

    let mut input = program_source.to_vec();
    input.push(SEPARATOR);
    input.extend_from_slice(data);

    let codes = program.codes();
    let mut shadow = MachineState::new(data);
    let mut records = Vec::new();
    let mut layouts_by_ip: Vec<(usize, ShadowState)> = Vec::new();
    let mut final_layout = None;
    let mut failed = false;
    let (mut mismatches, mut overruns, mut max_steps) = (0, 0, 0);

    let policy = SnapshotPolicy::AtIps(BTreeSet::from([open, close]));
    let host = direct::run_observed(interpreter, Some(&input), config, &policy, |host, event| {
        if failed {
            return;
        }
        let boundary_no = records.len() as u64;
        let tape = event.tape.expect("boundary events carry the tape");
        let skip = usize::try_from(-tape.start).unwrap_or(0);
        let cells = tape.cells.get(skip..).unwrap_or(&[]);
        let decoded = match decode_layout(cells, host.head) {
            Ok(d) => d,
            Err(error) => {
                failed = true;
                mismatches += 1;
                records.push(BoundaryRecord {
                    boundary_no,
                    sim_ip: shadow.ip,
                    sim_head: shadow.head.max(0) as usize,
                    shadow_steps: 0,
                    verdict: Verdict::Undecodable { error },
                });
                return;
            }
        };

        let mut advanced = 0;
        while shadow.ip != decoded.sim_ip && advanced <= MAX_CHAIN {
            direct::step(&mut shadow, &program, &strict);
            advanced += 1;
        }
        let expected = ShadowState::from_machine(&codes, &shadow);
        let verdict = if shadow.ip != decoded.sim_ip {
            overruns += 1;
            Verdict::ChainOverrun
        } else if !decoded.same_layout(&expected) {
            mismatches += 1;
            Verdict::LayoutMismatch {
                diff: decoded.describe_difference(&expected),
            }
        } else {
            Verdict::Pass
        };
        failed = verdict != Verdict::Pass;
        max_steps = max_steps.max(advanced);
        records.push(BoundaryRecord {
            boundary_no,
            sim_ip: decoded.sim_ip,
            sim_head: decoded.sim_head,
            shadow_steps: advanced,
            verdict,
        });
        if !layouts_by_ip.iter().any(|(ip, _)| *ip == decoded.sim_ip) {
            layouts_by_ip.push((decoded.sim_ip, decoded.clone()));
        }
        final_layout = Some(decoded);
    });

    let summary = CosimSummary {
        boundaries: records.len() as u64,
        mismatches,
        chain_overruns: overruns,
        max_shadow_steps: max_steps,
        output_matches: host.output == level0.output,
        host_halt: host.halt_reason,
        host_steps: host.steps,
    };
    Ok(CosimReport {
        records,
        summary,
        final_layout,
        layouts_by_ip,
        level0_output: level0.output,
        tower_output: host.output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbfi_source_shape() {
        assert!(!DBFI_SOURCE.contains('!'));
        let dbfi = parse(DBFI_SOURCE).unwrap();
        assert!(dbfi.max_depth() <= 8);
        assert_eq!(dbfi.top_level_loops().len(), 2);
    }

    #[test]
    fn fetch_boundary_opens_the_main_loop() {
        let dbfi = parse(DBFI_SOURCE).unwrap();
        let at = locate_fetch_boundary(&dbfi).unwrap();
        let offset = dbfi.source_map()[at];
        assert!(DBFI_SOURCE[offset..].starts_with("[[<]>[[>]>>[>>]"));

        let spaced = DBFI_SOURCE.replace('\n', " \n\t ");
        assert_eq!(locate_fetch_boundary(&parse(spaced).unwrap()), Ok(at));

        let one_loop = parse("+[-]").unwrap();
        assert_eq!(
            locate_fetch_boundary(&one_loop),
            Err(StructureMismatch { found: 1 })
        );
    }

    #[test]
    fn composition() {
        let job = TowerJob::from_stream(b"a!", 0);
        assert_eq!(compose_tower(&job), (b"a".to_vec(), b"".to_vec()));

        let job = TowerJob::from_stream(b",+.!a", 1);
        let (code, input) = compose_tower(&job);
        assert_eq!(code, DBFI_SOURCE.as_bytes());
        assert_eq!(input, b",+.!a");

        let job = TowerJob::from_stream(b",+.!a", 2);
        let (code, input) = compose_tower(&job);
        assert_eq!(code, DBFI_SOURCE.as_bytes());
        assert_eq!(input, format!("{DBFI_SOURCE}!,+.!a").into_bytes());
    }

    #[test]
    fn printed_layout_decodes() {
        let tape = [7, 2, 0, 0, 5, 2, 6, 1, 7, 1, 0, 0, 2, 97, 0, 0, 0, 0, 0, 0];
        let s = decode_layout(&tape, 9).unwrap();
        assert_eq!(s.codes, vec![7, 2, 5, 2, 6, 1, 7, 1]);
        assert_eq!(s.sim_ip, 2);
        assert_eq!(s.sim_cells, vec![97]);
        assert_eq!(s.sim_head, 0);
        assert_eq!(predict_layout(&s).cells, tape[..14].to_vec());
    }

    #[test]
    fn empty_program_layout() {
        let s = decode_layout(&[0, 0, 0, 0, 2, 0, 0], 1).unwrap();
        assert!(s.codes.is_empty());
        assert_eq!(s.sim_ip, 0);
        assert_eq!(s.sim_cells, vec![0]);
        assert_eq!(s.sim_head, 0);
    }

    #[test]
    fn decode_rejects_bad_tapes() {
        assert!(matches!(
            decode_layout(&[0, 0, 0, 0, 3, 0], 1),
            Err(DecodeError::BadMarker { at: 4, value: 3 })
        ));
        assert!(matches!(
            decode_layout(&[0, 0, 0, 0, 2, 0, 0, 0, 2, 0], 1),
            Err(DecodeError::MarkerOrder { at: 8 })
        ));
        assert!(matches!(
            decode_layout(&[0, 0, 9, 0, 0], 1),
            Err(DecodeError::BadCode { at: 2, value: 9 })
        ));
        assert_eq!(decode_layout(&[0, 0, 0, 0, 0, 5], 1), Err(DecodeError::NoHead));
        assert!(matches!(
            decode_layout(&[0, 0, 0, 0, 2, 0], 4),
            Err(DecodeError::HeadMisplaced { .. })
        ));
    }

    #[test]
    fn cosim_echo_program() {
        let report = cosimulate(b",[.[-],]", b"a", &EngineConfig::portable()).unwrap();
        assert!(report.is_clean(), "{}", report.to_json_lines());
        let at_dot = report.layout_at_ip(2).unwrap();
        assert_eq!(at_dot.codes, vec![7, 2, 5, 2, 6, 1, 7, 1]);
        assert_eq!(at_dot.sim_cells, vec![97]);
        assert_eq!(at_dot.sim_head, 0);
        assert_eq!(report.tower_output, b"a");
    }

    #[test]
    fn cosim_two_reads() {
        let report = cosimulate(b",>,", b"ab", &EngineConfig::portable()).unwrap();
        assert!(report.is_clean());
        let last = report.final_layout.unwrap();
        assert_eq!(last.sim_cells, vec![97, 98]);
        assert_eq!(last.sim_head, 1);
    }

    #[test]
    fn cosim_empty_program() {
        let report = cosimulate(b"", b"", &EngineConfig::portable()).unwrap();
        assert!(report.is_clean());
        assert_eq!(report.summary.mismatches, 0);
        assert!(report.tower_output.is_empty());
    }

    #[test]
    fn cosim_preconditions() {
        assert_eq!(
            cosimulate(b"<", b"", &EngineConfig::portable()).unwrap_err(),
            CosimError::UndefinedAtLevel0(HaltReason::Underflow)
        );
        assert_eq!(
            cosimulate(b"+!", b"", &EngineConfig::portable()).unwrap_err(),
            CosimError::SeparatorInProgram
        );
    }

    #[test]
    fn report_records_are_json_lines() {
        let report = cosimulate(b"+.", b"", &EngineConfig::portable()).unwrap();
        let text = report.to_json_lines();
        let lines: Vec<serde_json::Value> = text
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines.len() as u64, report.summary.boundaries + 1);
        assert_eq!(lines[0]["record"], "boundary");
        assert_eq!(lines[0]["verdict"]["kind"], "pass");
        assert_eq!(lines.last().unwrap()["record"], "summary");
    }
}
