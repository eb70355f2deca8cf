//! Decision procedures for verification queries.
//!
//! A query is a list of assumption formulas and one obligation over
//! integer, address, and bool symbols plus mapping reads. Backends decide
//! entailment by refuting the negation:
//!
//! * [`BackendKind::Builtin`] case-splits on address aliasing, grounds
//!   mapping reads to named cells, eliminates bools by enumeration, and
//!   runs integer-tightened Fourier–Motzkin on each disjunct. Proofs are
//!   exact within the linear fragment; counterexamples are replayed on
//!   the original formula before they are reported.
//! * [`BackendKind::Enumerative`] samples concrete assignments and can
//!   only refute.
//! * [`BackendKind::ExternalSmt`] prints each grounded case as an
//!   SMT-LIB 2 script for an external solver process.

pub mod backend;
pub mod enumerate;
pub mod fm;
pub mod formula;
pub mod partition;
pub mod prover;
pub mod smt;

pub use backend::{
    discharge, BackendConfig, BackendKind, ObligationSource, ProofResult, VerificationQuery,
};
pub use formula::{
    cell_name, CVal, Evaluator, Formula, LinExpr, MapTerm, Model, NonLinear, Sort, Term,
};
pub use partition::address_assignments;
