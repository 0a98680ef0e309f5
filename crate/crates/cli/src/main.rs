//! `dbfi`: run, stack, inspect and fuzz dbfi-BF programs.
//!
//! Program output is the only thing written to stdout by `run` and `tower`.
//! Exit codes: 0 completed, 1 bad input or a failed check, 2 engine error
//! (underflow), 3 step or tape budget exhausted.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dbfi::bytecode::{compile, execute};
use dbfi::conformance::{self, standard_engines, DiffBudget, GenParams, Verdict};
use dbfi::direct::{run_observed, SnapshotPolicy};
use dbfi::lang::{CellWidth, EngineConfig, Profile};
use dbfi::tower::{cosimulate, cosimulate_with, run_tower, EngineKind, TowerJob};
use dbfi::{parse, ExecutionOutcome, HaltReason};

#[derive(Parser)]
#[command(name = "dbfi", version, about = "dbfi-BF interpreters, towers and conformance tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a `code!data` program. Reads stdin when FILE is absent or `-`.
    Run {
        file: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineFlags,
        /// Use this file as input instead of the data after `!`.
        #[arg(long)]
        data_file: Option<PathBuf>,
        /// Trace with the direct engine: `every:K`, `ips:I,J,...` or `full`.
        #[arg(long, value_parser = parse_trace)]
        trace: Option<SnapshotPolicy>,
        /// Write trace records here instead of stderr.
        #[arg(long, requires = "trace")]
        trace_out: Option<PathBuf>,
    },
    /// Run a program under N stacked copies of dbfi.
    Tower {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        levels: u32,
        #[command(flatten)]
        engine: EngineFlags,
    },
    /// Check dbfi's tape layout at every fetch of the simulated program.
    Layout {
        file: PathBuf,
        /// Check this interpreter instead of the built-in dbfi.
        #[arg(long)]
        interpreter: Option<PathBuf>,
        #[arg(long, default_value_t = 1_000_000_000)]
        step_limit: u64,
    },
    /// Differential test on generated programs.
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        cases: u64,
        /// Tower depth compared against level 0; 0 compares the engines only.
        #[arg(long, default_value_t = 1)]
        levels: u32,
        /// Level-0 step budget per case.
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
        #[arg(long, default_value_t = 40)]
        max_tokens: usize,
        #[arg(long, default_value_t = 4)]
        max_depth: usize,
        /// Allow NUL bytes in generated data.
        #[arg(long)]
        allow_nul: bool,
        /// Write `case-<n>.b!` for every disagreement here.
        #[arg(long)]
        repro_dir: Option<PathBuf>,
        /// Write the JSON-lines report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print the instruction code of every token.
    Encode { file: PathBuf },
    /// Compile to bytecode and print it.
    Compile {
        file: PathBuf,
        /// Print the disassembly instead of the canonical source.
        #[arg(long)]
        disasm: bool,
    },
}

#[derive(Args)]
struct EngineFlags {
    #[arg(long, value_enum, default_value_t = ProfileArg::Portable)]
    profile: ProfileArg,
    #[arg(long, default_value_t = 8, value_parser = parse_width)]
    cell_width: u32,
    #[arg(long, default_value_t = 1_000_000_000)]
    step_limit: u64,
    /// Most distinct cells the head may visit.
    #[arg(long)]
    tape_limit: Option<u64>,
    /// Host engine; defaults to bytecode, or direct when tracing.
    #[arg(long, value_enum)]
    engine: Option<EngineArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Portable,
    Appendix,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EngineArg {
    Direct,
    Bytecode,
}

impl EngineFlags {
    fn config(&self) -> EngineConfig {
        let profile = match self.profile {
            ProfileArg::Portable => Profile::Portable,
            ProfileArg::Appendix => Profile::Appendix,
        };
        let mut config = EngineConfig::from_profile(profile)
            .with_cell_width(CellWidth::from_bits(self.cell_width).expect("validated by clap"))
            .with_step_limit(self.step_limit);
        config.tape_limit = self.tape_limit;
        config
    }
}

fn parse_width(s: &str) -> Result<u32, String> {
    let bits: u32 = s.parse().map_err(|e| format!("{e}"))?;
    CellWidth::from_bits(bits)
        .map(|_| bits)
        .ok_or_else(|| "cell width must be 8, 16 or 32".into())
}

fn parse_trace(s: &str) -> Result<SnapshotPolicy, String> {
    if s == "full" {
        return Ok(SnapshotPolicy::Full);
    }
    if let Some(k) = s.strip_prefix("every:") {
        let k: u64 = k.parse().map_err(|e| format!("{e}"))?;
        if k == 0 {
            return Err("every:K needs K >= 1".into());
        }
        return Ok(SnapshotPolicy::EveryK(k));
    }
    if let Some(list) = s.strip_prefix("ips:") {
        let ips = list
            .split(',')
            .map(|i| i.trim().parse::<usize>().map_err(|e| format!("{i}: {e}")))
            .collect::<Result<BTreeSet<_>, _>>()?;
        return Ok(SnapshotPolicy::AtIps(ips));
    }
    Err(format!("unknown trace policy {s:?}; use every:K, ips:I,J or full"))
}

/// A failure reported on stderr with exit code 1.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn read_source(file: Option<&Path>) -> Result<Vec<u8>, Failure> {
    match file {
        None => read_stdin(),
        Some(p) if p == Path::new("-") => read_stdin(),
        Some(p) => std::fs::read(p).map_err(|e| Failure(format!("{}: {e}", p.display()))),
    }
}

fn read_stdin() -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    io::stdin().read_to_end(&mut buf)?;
    Ok(buf)
}

fn split_stream(stream: &[u8]) -> (&[u8], &[u8]) {
    match stream.iter().position(|&b| b == b'!') {
        Some(at) => (&stream[..at], &stream[at + 1..]),
        None => (stream, &[]),
    }
}

fn finish(outcome: &ExecutionOutcome) -> Result<ExitCode, Failure> {
    let mut stdout = io::stdout().lock();
    stdout.write_all(&outcome.output)?;
    stdout.flush()?;
    Ok(match outcome.halt_reason {
        HaltReason::Completed => ExitCode::SUCCESS,
        HaltReason::Underflow => {
            eprintln!("dbfi: head moved left of cell 0 after {} steps", outcome.steps);
            ExitCode::from(2)
        }
        HaltReason::StepLimit => {
            eprintln!("dbfi: step limit reached after {} steps", outcome.steps);
            ExitCode::from(3)
        }
        HaltReason::TapeLimit => {
            eprintln!("dbfi: tape limit reached after {} steps", outcome.steps);
            ExitCode::from(3)
        }
    })
}

fn cmd_run(
    file: Option<&Path>,
    flags: &EngineFlags,
    data_file: Option<&Path>,
    trace: Option<&SnapshotPolicy>,
    trace_out: Option<&Path>,
) -> Result<ExitCode, Failure> {
    if trace.is_some() && flags.engine == Some(EngineArg::Bytecode) {
        return Err(Failure("--trace needs the direct engine".into()));
    }
    let source = read_source(file)?;
    let program = parse(&source)?;
    let data = data_file.map(std::fs::read).transpose()?;
    let config = flags.config();

    let outcome = match (trace, flags.engine) {
        (Some(policy), _) => {
            let sink: Box<dyn Write> = match trace_out {
                Some(p) => Box::new(File::create(p)?),
                None => Box::new(io::stderr()),
            };
            let mut sink = BufWriter::new(sink);
            let mut failed = None;
            let outcome = run_observed(&program, data.as_deref(), &config, policy, |_, event| {
                if failed.is_none() {
                    let line = serde_json::to_string(&event).expect("events serialize");
                    failed = writeln!(sink, "{line}").err();
                }
            });
            if let Some(e) = failed {
                return Err(e.into());
            }
            sink.flush()?;
            outcome
        }
        (None, Some(EngineArg::Direct)) => dbfi::direct::run(&program, data.as_deref(), &config),
        (None, _) => execute(&compile(&program), data.as_deref(), &config),
    };
    finish(&outcome)
}

fn cmd_tower(file: &Path, levels: u32, flags: &EngineFlags) -> Result<ExitCode, Failure> {
    let config = flags.config();
    if levels > 0 && config.cell_width != CellWidth::W8 {
        return Err(Failure("towers need 8-bit cells; dbfi relies on byte wrapping".into()));
    }
    let source = read_source(Some(file))?;
    let engine = match flags.engine {
        Some(EngineArg::Direct) => EngineKind::Direct,
        _ => EngineKind::Bytecode,
    };
    let job = TowerJob::from_stream(&source, levels)
        .with_engine(engine)
        .with_config(config);
    finish(&run_tower(&job)?)
}

fn cmd_layout(file: &Path, interpreter: Option<&Path>, step_limit: u64) -> Result<ExitCode, Failure> {
    let source = read_source(Some(file))?;
    let (code, data) = split_stream(&source);
    let config = EngineConfig::portable().with_step_limit(step_limit);
    let report = match interpreter {
        Some(path) => {
            let interp = parse(read_source(Some(path))?)?;
            cosimulate_with(&interp, code, data, &config)?
        }
        None => cosimulate(code, data, &config)?,
    };
    print!("{}", report.to_json_lines());
    if report.is_clean() {
        Ok(ExitCode::SUCCESS)
    } else {
        let s = &report.summary;
        eprintln!(
            "dbfi: layout check failed: {} mismatches, {} chain overruns, output matches: {}",
            s.mismatches, s.chain_overruns, s.output_matches
        );
        Ok(ExitCode::FAILURE)
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_fuzz(
    seed: u64,
    cases: u64,
    levels: u32,
    budget: u64,
    max_tokens: usize,
    max_depth: usize,
    allow_nul: bool,
    repro_dir: Option<&Path>,
    report: Option<&Path>,
) -> Result<ExitCode, Failure> {
    let params = GenParams {
        rng_seed: seed,
        max_tokens,
        max_depth,
        allow_nul,
        ..GenParams::default()
    };
    params.validate()?;
    let budget = DiffBudget {
        level0_steps: budget,
        ..DiffBudget::default()
    };
    let records = conformance::run_corpus(&params, cases, &standard_engines(levels), &budget);

    let lines = conformance::to_json_lines(&records);
    match report {
        Some(p) => std::fs::write(p, lines)?,
        None => print!("{lines}"),
    }

    let mut agreed = 0;
    let mut skipped = 0;
    let mut disagreed = 0;
    for r in &records {
        match r.verdict() {
            Verdict::Agree => agreed += 1,
            Verdict::Skipped { .. } => skipped += 1,
            Verdict::Disagree { .. } => {
                disagreed += 1;
                if let Some(dir) = repro_dir {
                    if let Some(path) = conformance::write_repro(dir, r)? {
                        eprintln!("dbfi: case {} disagrees; wrote {}", r.case, path.display());
                    }
                }
            }
        }
    }
    eprintln!("dbfi: {cases} cases: {agreed} agree, {disagreed} disagree, {skipped} skipped");
    Ok(if disagreed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_encode(file: &Path) -> Result<ExitCode, Failure> {
    let program = parse(read_source(Some(file))?)?;
    let codes: Vec<String> = program.codes().iter().map(u8::to_string).collect();
    println!("{}", codes.join(" "));
    Ok(ExitCode::SUCCESS)
}

fn cmd_compile(file: &Path, disasm: bool) -> Result<ExitCode, Failure> {
    let program = parse(read_source(Some(file))?)?;
    let bc = compile(&program);
    if disasm {
        print!("{}", bc.disassemble());
    } else {
        let code: String = bc.decompile().iter().map(|i| i.to_char()).collect();
        println!("{code}");
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Run {
            file,
            engine,
            data_file,
            trace,
            trace_out,
        } => cmd_run(
            file.as_deref(),
            engine,
            data_file.as_deref(),
            trace.as_ref(),
            trace_out.as_deref(),
        ),
        Command::Tower { file, levels, engine } => cmd_tower(file, *levels, engine),
        Command::Layout {
            file,
            interpreter,
            step_limit,
        } => cmd_layout(file, interpreter.as_deref(), *step_limit),
        Command::Fuzz {
            seed,
            cases,
            levels,
            budget,
            max_tokens,
            max_depth,
            allow_nul,
            repro_dir,
            report,
        } => cmd_fuzz(
            *seed,
            *cases,
            *levels,
            *budget,
            *max_tokens,
            *max_depth,
            *allow_nul,
            repro_dir.as_deref(),
            report.as_deref(),
        ),
        Command::Encode { file } => cmd_encode(file),
        Command::Compile { file, disasm } => cmd_compile(file, *disasm),
    };
    result.unwrap_or_else(|Failure(msg)| {
        eprintln!("dbfi: {msg}");
        ExitCode::FAILURE
    })
}
