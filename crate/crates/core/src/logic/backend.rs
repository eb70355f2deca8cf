//! Proof backend interface: queries, results, and dispatch.

use super::formula::{Formula, Model, Sort};
use crate::interp::RunConfig;
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    /// Linear-arithmetic decision procedure built into this crate.
    Builtin,
    /// Randomized concrete falsifier; can refute but never prove.
    Enumerative,
    /// External SMT solver speaking SMT-LIB 2.
    ExternalSmt,
}

#[derive(Debug, Clone)]
pub struct BackendConfig {
    pub kind: BackendKind,
    /// Machine width in bits; bounds the falsifier's corner values.
    pub width: u32,
    /// Addresses are `a0..=aK`.
    pub k_addresses: u32,
    /// Loop unrolling bound for condition generation.
    pub unroll: usize,
    /// Seed for the falsifier's samples.
    pub seed: u64,
    /// Number of concrete samples the falsifier tries.
    pub samples: usize,
    /// External solver binary; `None` falls back to the `MINISOLVER`
    /// environment variable.
    pub solver: Option<PathBuf>,
    pub timeout_ms: u64,
}

impl Default for BackendConfig {
    fn default() -> BackendConfig {
        BackendConfig {
            kind: BackendKind::Builtin,
            width: 256,
            k_addresses: 4,
            unroll: 4,
            seed: 0,
            samples: 256,
            solver: None,
            timeout_ms: 10_000,
        }
    }
}

impl BackendConfig {
    pub fn for_run(kind: BackendKind, run: &RunConfig) -> BackendConfig {
        BackendConfig {
            kind,
            width: run.width,
            k_addresses: run.k_addresses,
            ..BackendConfig::default()
        }
    }

    pub fn uint_max(&self) -> num_bigint::BigInt {
        (num_bigint::BigInt::from(1) << self.width) - 1
    }
}

/// What failing to discharge the obligation means.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObligationSource {
    /// Candidate invariant by pool id: refutation disables the candidate.
    Candidate(usize),
    /// An `assert` in the contract at this location: refutation is a
    /// verified assertion violation.
    Assertion(String),
}

#[derive(Debug, Clone)]
pub struct VerificationQuery {
    pub function: String,
    /// Human-readable path tag for diagnostics.
    pub path: String,
    /// Sorts of the symbolic variables mentioned in the formulas.
    pub vars: BTreeMap<String, Sort>,
    /// Value sort of each mapping, by base name.
    pub maps: BTreeMap<String, Sort>,
    pub assumptions: Vec<Formula>,
    pub obligation: Formula,
    pub source: ObligationSource,
    /// Set when condition generation could not encode this obligation
    /// (loop bound exceeded, construct outside the linear fragment);
    /// `discharge` reports it as UNKNOWN without running a backend.
    pub blocked: Option<String>,
}

impl VerificationQuery {
    /// `assumptions && !obligation`: satisfiable exactly when the
    /// obligation does not follow.
    pub fn negation(&self) -> Formula {
        let mut fs = self.assumptions.clone();
        fs.push(Formula::not(self.obligation.clone()));
        Formula::and(fs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProofResult {
    Proved,
    /// A concrete counterexample, when the backend can produce one.
    Refuted(Option<Model>),
    /// Could not decide; the reason is diagnostic only.
    Unknown(String),
}

impl ProofResult {
    pub fn is_proved(&self) -> bool {
        matches!(self, ProofResult::Proved)
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, ProofResult::Refuted(_))
    }
}

impl fmt::Display for ProofResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProofResult::Proved => write!(f, "proved"),
            ProofResult::Refuted(Some(m)) => write!(f, "refuted: {m}"),
            ProofResult::Refuted(None) => write!(f, "refuted"),
            ProofResult::Unknown(r) => write!(f, "unknown: {r}"),
        }
    }
}

/// Run the configured backend on one query.
pub fn discharge(query: &VerificationQuery, config: &BackendConfig) -> ProofResult {
    if let Some(reason) = &query.blocked {
        return ProofResult::Unknown(reason.clone());
    }
    match config.kind {
        BackendKind::Builtin => super::prover::prove(query, config),
        BackendKind::Enumerative => super::enumerate::falsify(query, config),
        BackendKind::ExternalSmt => super::smt::discharge_external(query, config),
    }
}
