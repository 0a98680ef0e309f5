//! Random program generation and differential execution across engines and
//! tower levels.

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bytecode;
use crate::direct::{self, ExecutionOutcome, HaltReason};
use crate::lang::{parse, EngineConfig, Instruction, Program, UnderflowPolicy, SEPARATOR};
use crate::tower::{run_tower, EngineKind, TowerJob};

/// Relative frequency of each instruction in generated code. `LoopOpen`
/// controls how often a loop starts, `LoopClose` how often an open loop ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Weights {
    pub move_right: u32,
    pub move_left: u32,
    pub inc: u32,
    pub dec: u32,
    pub input: u32,
    pub output: u32,
    pub loop_open: u32,
    pub loop_close: u32,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            move_right: 4,
            move_left: 3,
            inc: 5,
            dec: 4,
            input: 2,
            output: 3,
            loop_open: 2,
            loop_close: 3,
        }
    }
}

impl Weights {
    fn of(&self, i: Instruction) -> u32 {
        match i {
            Instruction::MoveRight => self.move_right,
            Instruction::MoveLeft => self.move_left,
            Instruction::Inc => self.inc,
            Instruction::Dec => self.dec,
            Instruction::Input => self.input,
            Instruction::Output => self.output,
            Instruction::LoopOpen => self.loop_open,
            Instruction::LoopClose => self.loop_close,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenParams {
    pub rng_seed: u64,
    pub max_tokens: usize,
    pub max_depth: usize,
    pub weights: Weights,
    /// Inclusive bounds on the data length.
    pub data_len: (usize, usize),
    /// Allow NUL bytes in data. Off by default, so reading a NUL cannot be
    /// confused with reading past the end.
    pub allow_nul: bool,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            rng_seed: 0,
            max_tokens: 40,
            max_depth: 4,
            weights: Weights::default(),
            data_len: (0, 4),
            allow_nul: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenParamsError {
    #[error("max_depth must be at least 1")]
    ZeroDepth,
    #[error("instruction weights are all zero")]
    NoWeight,
    #[error("data length range {0}..={1} is empty")]
    DataRange(usize, usize),
}

impl GenParams {
    pub fn validate(&self) -> Result<(), GenParamsError> {
        if self.max_depth == 0 {
            return Err(GenParamsError::ZeroDepth);
        }
        if Instruction::ALL.iter().all(|&i| self.weights.of(i) == 0) {
            return Err(GenParamsError::NoWeight);
        }
        if self.data_len.0 > self.data_len.1 {
            return Err(GenParamsError::DataRange(self.data_len.0, self.data_len.1));
        }
        Ok(())
    }

    /// Parameters for case `index` of a corpus seeded with `rng_seed`.
    pub fn for_case(&self, index: u64) -> GenParams {
        GenParams {
            rng_seed: splitmix(self.rng_seed ^ splitmix(index)),
            ..self.clone()
        }
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// A generated `code!data` stream and its parse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generated {
    pub source: Vec<u8>,
    pub program: Program,
}

impl Generated {
    pub fn code(&self) -> &[u8] {
        let at = self
            .source
            .iter()
            .position(|&b| b == SEPARATOR)
            .expect("generated streams have a separator");
        &self.source[..at]
    }

    pub fn data(&self) -> &[u8] {
        self.program.data_segment()
    }
}

/// Generates a bracket-balanced program with nesting at most `max_depth`.
/// Data is only generated for programs that read input.
pub fn gen_program(params: &GenParams) -> Generated {
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let len = rng.gen_range(0..=params.max_tokens);
    let mut code = String::with_capacity(len);
    let mut depth = 0usize;
    let mut reads = false;

    for emitted in 0..len {
        let remaining = len - emitted;
        let instr = if remaining == depth {
            Instruction::LoopClose
        } else {
            let allowed = |i: Instruction| match i {
                Instruction::LoopOpen => depth < params.max_depth && remaining >= depth + 2,
                Instruction::LoopClose => depth > 0,
                _ => true,
            };
            pick(&mut rng, &params.weights, allowed)
                .unwrap_or(if depth > 0 { Instruction::LoopClose } else { Instruction::Inc })
        };
        match instr {
            Instruction::LoopOpen => depth += 1,
            Instruction::LoopClose => depth -= 1,
            Instruction::Input => reads = true,
            _ => {}
        }
        code.push(instr.to_char());
    }

    let mut source = code.into_bytes();
    source.push(SEPARATOR);
    if reads {
        let n = rng.gen_range(params.data_len.0..=params.data_len.1);
        let low = if params.allow_nul { 0 } else { 1 };
        source.extend((0..n).map(|_| rng.gen_range(low..=255u8)));
    }
    let program = parse(&source).expect("generated programs are balanced");
    Generated { source, program }
}

fn pick(
    rng: &mut ChaCha8Rng,
    weights: &Weights,
    allowed: impl Fn(Instruction) -> bool,
) -> Option<Instruction> {
    let total: u32 = Instruction::ALL
        .iter()
        .filter(|&&i| allowed(i))
        .map(|&i| weights.of(i))
        .sum();
    if total == 0 {
        return None;
    }
    let mut roll = rng.gen_range(0..total);
    for i in Instruction::ALL.into_iter().filter(|&i| allowed(i)) {
        let w = weights.of(i);
        if roll < w {
            return Some(i);
        }
        roll -= w;
    }
    unreachable!()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SkipReason {
    Underflow,
    Budget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Filter {
    Accept,
    Reject(SkipReason),
}

/// Whether a program has defined behavior within the budget: it must
/// complete at level 0 without moving left of cell 0. Wrapping arithmetic is
/// accepted since every engine and level here wraps modulo the cell width.
pub fn filter_defined(program: &Program, data: &[u8], config: &EngineConfig) -> Filter {
    let strict = EngineConfig {
        underflow: UnderflowPolicy::Strict,
        ..*config
    };
    let out = bytecode::execute(&bytecode::compile(program), Some(data), &strict);
    match out.halt_reason {
        HaltReason::Completed => Filter::Accept,
        HaltReason::Underflow => Filter::Reject(SkipReason::Underflow),
        HaltReason::StepLimit | HaltReason::TapeLimit => Filter::Reject(SkipReason::Budget),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffBudget {
    /// Step budget for level-0 runs.
    pub level0_steps: u64,
    /// Level-`n` runs get `level0_steps * overhead^n` steps.
    pub overhead: u64,
}

impl Default for DiffBudget {
    fn default() -> Self {
        DiffBudget {
            level0_steps: 10_000_000,
            overhead: 10_000,
        }
    }
}

impl DiffBudget {
    pub fn steps_at_level(&self, levels: u32) -> u64 {
        (0..levels).fold(self.level0_steps, |b, _| b.saturating_mul(self.overhead))
    }
}

/// Something that runs a dbfi-BF program on a data stream.
pub trait Engine: Send + Sync {
    fn name(&self) -> String;
    fn run(&self, program: &Program, data: &[u8], budget: &DiffBudget) -> ExecutionOutcome;
}

/// The stepping engine at level 0.
pub struct Direct;
/// The bytecode engine at level 0.
pub struct Compiled;
/// dbfi stacked `levels` deep on the given host engine.
pub struct Tower {
    pub levels: u32,
    pub host: EngineKind,
}

impl Engine for Direct {
    fn name(&self) -> String {
        "direct/L0".into()
    }

    fn run(&self, program: &Program, data: &[u8], budget: &DiffBudget) -> ExecutionOutcome {
        let config = EngineConfig::portable().with_step_limit(budget.level0_steps);
        direct::run(program, Some(data), &config)
    }
}

impl Engine for Compiled {
    fn name(&self) -> String {
        "bytecode/L0".into()
    }

    fn run(&self, program: &Program, data: &[u8], budget: &DiffBudget) -> ExecutionOutcome {
        let config = EngineConfig::portable().with_step_limit(budget.level0_steps);
        bytecode::execute(&bytecode::compile(program), Some(data), &config)
    }
}

impl Engine for Tower {
    fn name(&self) -> String {
        let host = match self.host {
            EngineKind::Direct => "direct",
            EngineKind::Bytecode => "bytecode",
        };
        format!("{host}/L{}", self.levels)
    }

    fn run(&self, program: &Program, data: &[u8], budget: &DiffBudget) -> ExecutionOutcome {
        let mut job = TowerJob::from_stream(program.code_string().as_bytes(), self.levels)
            .with_engine(self.host)
            .with_step_budget(budget.steps_at_level(self.levels));
        job.data = data.to_vec();
        run_tower(&job).expect("dbfi and canonical code always parse")
    }
}

/// One engine's result on a case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigOutcome {
    pub engine: String,
    pub output: Vec<u8>,
    pub halt: HaltReason,
    pub steps: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Agree,
    /// Smallest output index at which some engine departs from the
    /// reference. A different halt reason with equal output diverges at the
    /// output's end.
    Disagree { index: usize },
    Skipped { reason: SkipReason },
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Agree => f.write_str("agree"),
            Verdict::Disagree { index } => write!(f, "disagree at byte {index}"),
            Verdict::Skipped { reason } => write!(f, "skipped ({reason:?})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffVerdict {
    pub code: String,
    pub data: Vec<u8>,
    pub outcomes: Vec<ConfigOutcome>,
    pub verdict: Verdict,
    pub budget: DiffBudget,
}

impl DiffVerdict {
    /// The `code!data` stream of this case.
    pub fn repro(&self) -> Vec<u8> {
        let mut out = self.code.clone().into_bytes();
        out.push(SEPARATOR);
        out.extend_from_slice(&self.data);
        out
    }
}

/// Direct and bytecode at level 0, and dbfi on the bytecode engine at
/// `levels` (1 for the standard comparison; 0 leaves it out).
pub fn standard_engines(levels: u32) -> Vec<Box<dyn Engine>> {
    let mut engines: Vec<Box<dyn Engine>> = vec![Box::new(Direct), Box::new(Compiled)];
    for l in 1..=levels {
        engines.push(Box::new(Tower {
            levels: l,
            host: EngineKind::Bytecode,
        }));
    }
    engines
}

/// Compares direct, bytecode and level-1 tower outputs.
pub fn diff_run(program: &Program, data: &[u8], budget: &DiffBudget) -> DiffVerdict {
    diff_with(&standard_engines(1), program, data, budget)
}

/// Runs every engine and compares each against the first.
/// Budget exhaustion or underflow in any engine skips the case.
pub fn diff_with(
    engines: &[Box<dyn Engine>],
    program: &Program,
    data: &[u8],
    budget: &DiffBudget,
) -> DiffVerdict {
    let mut outcomes: Vec<ConfigOutcome> = Vec::with_capacity(engines.len());
    let mut verdict = Verdict::Agree;
    for engine in engines {
        let out = engine.run(program, data, budget);
        outcomes.push(ConfigOutcome {
            engine: engine.name(),
            output: out.output,
            halt: out.halt_reason,
            steps: out.steps,
        });
        let last = outcomes.last().unwrap();
        match last.halt {
            HaltReason::Underflow if outcomes.len() == 1 => {
                verdict = Verdict::Skipped { reason: SkipReason::Underflow };
                break;
            }
            HaltReason::StepLimit | HaltReason::TapeLimit => {
                verdict = Verdict::Skipped { reason: SkipReason::Budget };
                break;
            }
            _ => {}
        }
    }
    if verdict == Verdict::Agree {
        let reference = &outcomes[0];
        verdict = outcomes[1..]
            .iter()
            .filter_map(|o| divergence(reference, o))
            .min()
            .map_or(Verdict::Agree, |index| Verdict::Disagree { index });
    }
    DiffVerdict {
        code: program.code_string(),
        data: data.to_vec(),
        outcomes,
        verdict,
        budget: *budget,
    }
}

fn divergence(a: &ConfigOutcome, b: &ConfigOutcome) -> Option<usize> {
    let common = a.output.len().min(b.output.len());
    if let Some(i) = (0..common).find(|&i| a.output[i] != b.output[i]) {
        return Some(i);
    }
    (a.output.len() != b.output.len() || a.halt != b.halt).then_some(common)
}

/// One case of a corpus run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub case: u64,
    pub seed: u64,
    pub filter: Filter,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diff: Option<DiffVerdict>,
}

impl CaseRecord {
    pub fn verdict(&self) -> Verdict {
        match (&self.diff, self.filter) {
            (Some(d), _) => d.verdict,
            (None, Filter::Reject(reason)) => Verdict::Skipped { reason },
            (None, Filter::Accept) => Verdict::Agree,
        }
    }

    pub fn is_disagreement(&self) -> bool {
        matches!(self.verdict(), Verdict::Disagree { .. })
    }
}

/// Generates `cases` programs from `params` and diffs the accepted ones on
/// `engines`, in parallel. Results come back in case order and do not depend
/// on scheduling.
pub fn run_corpus(
    params: &GenParams,
    cases: u64,
    engines: &[Box<dyn Engine>],
    budget: &DiffBudget,
) -> Vec<CaseRecord> {
    let filter_config = EngineConfig::portable().with_step_limit(budget.level0_steps);
    (0..cases)
        .into_par_iter()
        .map(|case| {
            let p = params.for_case(case);
            let generated = gen_program(&p);
            let filter = filter_defined(&generated.program, generated.data(), &filter_config);
            let diff = (filter == Filter::Accept)
                .then(|| diff_with(engines, &generated.program, generated.data(), budget));
            CaseRecord {
                case,
                seed: p.rng_seed,
                filter,
                diff,
            }
        })
        .collect()
}

/// Accepted cases only, in case order, generating until `wanted` are found
/// or `max_cases` seeds have been tried.
pub fn accepted_corpus(
    params: &GenParams,
    wanted: usize,
    max_cases: u64,
    budget: &DiffBudget,
) -> Vec<(u64, Generated)> {
    const BATCH: u64 = 256;
    let config = EngineConfig::portable().with_step_limit(budget.level0_steps);
    let mut found = Vec::new();
    let mut next = 0;
    while found.len() < wanted && next < max_cases {
        let end = (next + BATCH).min(max_cases);
        let batch: Vec<(u64, Generated)> = (next..end)
            .into_par_iter()
            .filter_map(|case| {
                let g = gen_program(&params.for_case(case));
                (filter_defined(&g.program, g.data(), &config) == Filter::Accept).then_some((case, g))
            })
            .collect();
        found.extend(batch);
        next = end;
    }
    found.truncate(wanted);
    found
}

/// Line-delimited JSON, one record per case.
pub fn to_json_lines(records: &[CaseRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out += &serde_json::to_string(r).expect("records serialize");
        out.push('\n');
    }
    out
}

/// Writes `code!data` for a failing case to `dir/case-<n>.b!`.
pub fn write_repro(dir: &Path, record: &CaseRecord) -> io::Result<Option<PathBuf>> {
    let Some(diff) = &record.diff else {
        return Ok(None);
    };
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("case-{}.b!", record.case));
    std::fs::write(&path, diff.repro())?;
    Ok(Some(path))
}

pub mod mutants {
    //! Deliberately broken engines, used to check that the differential
    //! harness notices real bugs.

    use super::*;
    use crate::direct::MachineState;

    #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
    pub enum Mutation {
        /// Reading past the end of data zeroes the cell.
        WrongEof,
        /// `[` on a zero cell lands one token past the instruction after `]`.
        OffByOneJump,
        /// `+` and `-` saturate instead of wrapping.
        NoWrap,
        /// `+` decrements and `-` increments.
        SwappedIncDec,
        /// `.` prints the cell right of the head.
        HeadOffByOne,
    }

    impl Mutation {
        pub const ALL: [Mutation; 5] = [
            Mutation::WrongEof,
            Mutation::OffByOneJump,
            Mutation::NoWrap,
            Mutation::SwappedIncDec,
            Mutation::HeadOffByOne,
        ];
    }

    pub struct Mutant(pub Mutation);

    impl Engine for Mutant {
        fn name(&self) -> String {
            format!("mutant/{:?}", self.0)
        }

        fn run(&self, program: &Program, data: &[u8], budget: &DiffBudget) -> ExecutionOutcome {
            use Instruction::*;
            let m = self.0;
            let tokens = program.tokens();
            let mut st = MachineState::new(data);
            let halt = loop {
                if st.ip >= tokens.len() {
                    break None;
                }
                if st.steps >= budget.level0_steps {
                    break Some(HaltReason::StepLimit);
                }
                let partner = || program.partner(st.ip).unwrap();
                let cell = st.cell();
                st.ip = match tokens[st.ip] {
                    LoopOpen if cell == 0 => {
                        partner() + if m == Mutation::OffByOneJump { 2 } else { 1 }
                    }
                    LoopClose if cell != 0 => partner() + 1,
                    MoveLeft if st.head == 0 => break Some(HaltReason::Underflow),
                    t => {
                        let t = match (m, t) {
                            (Mutation::SwappedIncDec, Inc) => Dec,
                            (Mutation::SwappedIncDec, Dec) => Inc,
                            _ => t,
                        };
                        match t {
                            MoveRight => st.set_head(st.head + 1),
                            MoveLeft => st.set_head(st.head - 1),
                            Inc if m == Mutation::NoWrap => st.tape.set(st.head, (cell + 1).min(255)),
                            Dec if m == Mutation::NoWrap => st.tape.set(st.head, cell.saturating_sub(1)),
                            Inc => st.tape.set(st.head, (cell + 1) & 0xff),
                            Dec => st.tape.set(st.head, cell.wrapping_sub(1) & 0xff),
                            Output if m == Mutation::HeadOffByOne => {
                                st.output.push(st.tape.get(st.head + 1) as u8)
                            }
                            Output => st.output.push(cell as u8),
                            Input => match st.input.get(st.input_cursor) {
                                Some(&b) => {
                                    st.input_cursor += 1;
                                    st.tape.set(st.head, b as u32);
                                }
                                None if m == Mutation::WrongEof => st.tape.set(st.head, 0),
                                None => {}
                            },
                            LoopOpen | LoopClose => {}
                        }
                        st.ip + 1
                    }
                };
                st.ip = st.ip.min(tokens.len());
                st.steps += 1;
            };
            st.status = match halt {
                None => crate::direct::Status::Halted,
                Some(kind) => crate::direct::Status::Error(kind),
            };
            ExecutionOutcome::from_state(st)
        }
    }
}
