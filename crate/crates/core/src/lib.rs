//! Invariant mining and verification for a miniature smart-contract language.
//!
//! The crate is organized as a pipeline:
//!
//! * [`lang`] parses and type-checks contract source and computes the
//!   per-function variable dependence relation.
//! * [`interp`] executes calls against contract state, generates seeded call
//!   histories, and replays them into execution traces.
//! * [`trace`] reads and writes the canonical JSON-lines trace format.
//! * [`spec`] defines the invariant specification language: parsing,
//!   three-valued evaluation over records, and canonical printing.
//! * [`detect`] instantiates the candidate template catalog and classifies
//!   candidates against a trace set (likely / partial / discarded).
//! * [`logic`] holds the formula layer and the proof backends: a built-in
//!   linear-arithmetic prover, an enumerative falsifier, and an external
//!   SMT-LIB driver.
//! * [`vcgen`] compiles candidate obligations into verification queries by
//!   symbolic forward execution.
//! * [`houdini`] runs the inductive-subset loop over a candidate pool.
//! * [`semantic`] answers entailment and triviality queries over predicates.
//! * [`implication`] learns and weakens implication-shaped postconditions.
//! * [`suppress`] removes invariants entailed by stronger ones.
//! * [`pipeline`] ties everything together: end-to-end inference, evaluation
//!   against ground truth, trace checking, and mutation testing.

pub mod detect;
pub mod diag;
pub mod houdini;
pub mod implication;
pub mod interp;
pub mod lang;
pub mod lexer;
pub mod logic;
pub mod pipeline;
pub mod semantic;
pub mod spec;
pub mod suppress;
pub mod trace;
pub mod value;
pub mod vcgen;

pub use pipeline::Config;
