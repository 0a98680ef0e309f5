mod support;

use dbfi::conformance::{accepted_corpus, DiffBudget, GenParams};
use dbfi::direct::run;
use dbfi::lang::{parse, EngineConfig};
use dbfi::tower::{
    cosimulate, cosimulate_with, run_tower, EngineKind, TowerJob, Verdict, DBFI_SOURCE, MAX_CHAIN,
};

use support::{EXAMPLES, QUINE};

fn level0_output(stream: &str) -> Vec<u8> {
    run(&parse(stream).unwrap(), None, &EngineConfig::portable()).output
}

fn tower_output(stream: &str, levels: u32, engine: EngineKind) -> Vec<u8> {
    let job = TowerJob::from_stream(stream.as_bytes(), levels)
        .with_engine(engine)
        .with_step_budget(10_000_000_000);
    let out = run_tower(&job).unwrap();
    assert!(out.completed(), "{stream} at level {levels}: {:?}", out.halt_reason);
    out.output
}

#[test]
fn level_one_reproduces_level_zero_on_examples() {
    for src in EXAMPLES {
        let expected = level0_output(src);
        assert_eq!(tower_output(src, 1, EngineKind::Bytecode), expected, "{src}");
    }
}

#[test]
fn host_engines_agree_on_level_one() {
    for src in [",+.!a", QUINE, ",[>+>+<<-]>.>.!X"] {
        let job = TowerJob::from_stream(src.as_bytes(), 1);
        let a = run_tower(&job.clone().with_engine(EngineKind::Direct)).unwrap();
        let b = run_tower(&job.with_engine(EngineKind::Bytecode)).unwrap();
        assert_eq!(a, b, "{src}");
    }
}

#[test]
fn level_two_reproduces_level_zero() {
    for src in [",+.!a", "a!", ",!", "+,.!"] {
        assert_eq!(tower_output(src, 2, EngineKind::Bytecode), level0_output(src), "{src}");
    }
}

#[test]
fn tower_budget_is_reported() {
    let job = TowerJob::from_stream(b",+.!a", 1).with_step_budget(1000);
    let out = run_tower(&job).unwrap();
    assert_eq!(out.halt_reason, dbfi::HaltReason::StepLimit);
    assert_eq!(out.steps, 1000);
}

#[test]
fn dbfi_runs_itself_on_the_quine() {
    assert_eq!(tower_output(QUINE, 1, EngineKind::Bytecode), QUINE.as_bytes());
}

#[test]
fn cosimulation_passes_on_examples() {
    for src in EXAMPLES {
        let (code, data) = src.split_once('!').unwrap();
        let report = cosimulate(code.as_bytes(), data.as_bytes(), &EngineConfig::portable()).unwrap();
        assert!(report.is_clean(), "{src}\n{}", report.to_json_lines());
        assert!(report.summary.max_shadow_steps <= MAX_CHAIN);
        // one boundary on entry, then one per simulated instruction
        let level0 = run(&parse(src).unwrap(), None, &EngineConfig::portable());
        assert_eq!(report.summary.boundaries, level0.steps + 1, "{src}");
    }
}

#[test]
fn cosimulation_passes_on_generated_programs() {
    let params = GenParams {
        rng_seed: 2003,
        max_tokens: 30,
        ..GenParams::default()
    };
    let budget = DiffBudget {
        level0_steps: 2_000,
        ..DiffBudget::default()
    };
    let corpus = accepted_corpus(&params, 60, 2_000, &budget);
    assert_eq!(corpus.len(), 60);
    for (case, g) in corpus {
        let report = cosimulate(g.code(), g.data(), &EngineConfig::portable()).unwrap();
        assert!(report.is_clean(), "case {case}: {:?}\n{}", g.source, report.to_json_lines());
        for r in &report.records {
            assert!(r.shadow_steps <= MAX_CHAIN);
        }
    }
}

#[test]
fn corrupted_interpreter_is_caught() {
    // subtracting from 10 instead of 9 shifts every instruction code by one
    let corrupted = DBFI_SOURCE.replacen("<+++++++++>", "<++++++++++>", 1);
    let interpreter = parse(&corrupted).unwrap();
    let cfg = EngineConfig::portable().with_step_limit(10_000_000);
    let report = cosimulate_with(&interpreter, b",[.[-],]", b"a", &cfg).unwrap();
    assert!(!report.is_clean());
    assert!(matches!(
        report.records.first().map(|r| &r.verdict),
        Some(Verdict::LayoutMismatch { .. })
    ));
}
