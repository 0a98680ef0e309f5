//! Toolkit for dbfi-BF: a BF dialect whose single input stream carries the
//! program, a `!`, and then the program's data.
//!
//! - [`lang`]: instructions, parser, dbfi instruction codes, engine profiles.
//! - [`direct`]: the reference stepping interpreter, with tracing.
//! - [`bytecode`]: a run-coalescing compiler and its executor.
//! - [`tower`]: the dbfi self-interpreter, interpretation towers, and the
//!   tape-layout cosimulation.
//! - [`conformance`]: random programs and differential runs.

pub mod bytecode;
pub mod conformance;
pub mod direct;
pub mod lang;
pub mod tape;
pub mod tower;

pub use direct::{ExecutionOutcome, HaltReason, MachineState};
pub use lang::{parse, EngineConfig, Instruction, Program};
