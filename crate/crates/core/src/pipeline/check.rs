//! Runtime cross-checks: evaluate reported invariants against recorded
//! executions, or against a single quiescent state.

use crate::interp::{RunConfig, TraceSet, TxStatus};
use crate::lang::Contract;
use crate::spec::{Bool3, EvalCtx, Predicate, Scope};
use crate::value::ContractState;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CheckError {
    #[error("invariant scope names unknown function `{0}`")]
    UnknownFunction(String),
    #[error("only contract invariants are checkable at a quiescent state; got {0}")]
    ScopeMismatch(String),
}

/// A reported invariant observed false on a concrete record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub tx: usize,
    /// Index into the invariant list handed to the checker.
    pub candidate: usize,
}

/// Evaluates every invariant on every successful record. An evaluation
/// that comes back undefined (a faulting index, a missing key) is not a
/// violation — only a definite `false` is.
pub fn check_trace(
    contract: &Contract,
    config: &RunConfig,
    invs: &[(Scope, Predicate)],
    traces: &TraceSet,
) -> Result<Vec<Violation>, CheckError> {
    for (scope, _) in invs {
        if let Some(f) = scope.function() {
            if contract.function(f).is_none() {
                return Err(CheckError::UnknownFunction(f.to_string()));
            }
        }
    }
    let ctx = EvalCtx::new(contract, config);
    let mut out = Vec::new();
    for rec in traces {
        if rec.status != TxStatus::Success {
            continue;
        }
        for (i, (scope, pred)) in invs.iter().enumerate() {
            if ctx.eval_on_record(scope, pred, rec) == Some(Bool3::False) {
                out.push(Violation { tx: rec.tx, candidate: i });
            }
        }
    }
    Ok(out)
}

/// Evaluates contract invariants at one quiescent state; anything scoped
/// to a function (and thus allowed to mention parameters or entry
/// values) is rejected.
pub fn check_state(
    contract: &Contract,
    config: &RunConfig,
    invs: &[(Scope, Predicate)],
    state: &ContractState,
) -> Result<Vec<usize>, CheckError> {
    let ctx = EvalCtx::new(contract, config);
    let mut out = Vec::new();
    for (i, (scope, pred)) in invs.iter().enumerate() {
        if *scope != Scope::ContractInv {
            return Err(CheckError::ScopeMismatch(format!("{scope:?}")));
        }
        if ctx.eval_on_state(pred, state) == Bool3::False {
            out.push(i);
        }
    }
    Ok(out)
}
