//! The verification fixpoint: enable a batch of candidates, verify every
//! public function, disable whatever fails, and repeat until the
//! surviving conjunction is inductive.
//!
//! Failures are disabled in batch each round rather than one at a time —
//! the fixpoint is the same either way (the property tests below exercise
//! order independence and maximality directly). A refuted candidate and
//! an undischarged one are both disabled, but only the former is reported
//! `Refuted`: `Verified` always means proved, so a prover giving up
//! parks the candidate as `Undetermined`.

use crate::detect::{CandidatePool, CandidateStatus};
use crate::interp::RunConfig;
use crate::lang::Contract;
use crate::logic::{discharge, BackendConfig, Model, ObligationSource, ProofResult};
use crate::spec::{Bool3, EvalCtx, Predicate, Scope};
use crate::value::ContractState;
use crate::vcgen::{gen_vcs, CandidateRef};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    /// A contract `assert` is reachable with a falsifying state: the
    /// contract itself is incorrect and inference stops.
    #[error("assertion `{label}` in `{function}` can fail")]
    AssertionViolation {
        function: String,
        label: String,
        model: Option<Model>,
    },
}

/// What one verification batch concluded, by candidate id.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct InferReport {
    pub verified: Vec<usize>,
    pub refuted: Vec<usize>,
    /// Disabled without a refutation, with the reason the prover gave up.
    pub undetermined: Vec<(usize, String)>,
    pub rounds: usize,
}

/// Runs the fixpoint over `enabled` candidates, taking `assumed`
/// invariants (survivors of earlier batches) as given. Updates the status
/// of every enabled candidate in the pool and reports the partition.
pub fn static_infer(
    contract: &Contract,
    pool: &mut CandidatePool,
    enabled: &[usize],
    assumed: &[(Scope, Predicate)],
    initial_state: &ContractState,
    config: &BackendConfig,
) -> Result<InferReport, VerifyError> {
    let mut active: BTreeSet<usize> = enabled.iter().copied().collect();
    let mut report = InferReport::default();

    // Contract invariants must hold before the first call ever runs;
    // the inductive step alone would accept invariants of unreachable
    // strength. Checked once, by direct evaluation.
    let run_config = RunConfig {
        width: config.width,
        k_addresses: config.k_addresses,
        ..RunConfig::default()
    };
    let ctx = EvalCtx::new(contract, &run_config);
    let mut drop_now = Vec::new();
    for &id in &active {
        let c = pool.get(id);
        if c.scope != Scope::ContractInv {
            continue;
        }
        match ctx.eval_on_state(&c.pred, initial_state) {
            Bool3::True => {}
            Bool3::False => {
                report.refuted.push(id);
                drop_now.push(id);
            }
            Bool3::Undef => {
                report
                    .undetermined
                    .push((id, "undefined on the initial state".into()));
                drop_now.push(id);
            }
        }
    }
    for id in drop_now {
        active.remove(&id);
    }

    loop {
        report.rounds += 1;
        let mut refuted_now = BTreeSet::new();
        let mut undet_now: BTreeMap<usize, String> = BTreeMap::new();

        let refs: Vec<CandidateRef> = active
            .iter()
            .map(|&id| {
                let c = pool.get(id);
                CandidateRef {
                    id,
                    scope: &c.scope,
                    pred: &c.pred,
                }
            })
            .collect();
        for f in contract.public_functions() {
            let queries = gen_vcs(contract, &f.name, &refs, assumed, config)
                .expect("public function of the same contract");
            for q in &queries {
                match (discharge(q, config), &q.source) {
                    (ProofResult::Proved, _) => {}
                    (ProofResult::Refuted(model), ObligationSource::Assertion(label)) => {
                        return Err(VerifyError::AssertionViolation {
                            function: q.function.clone(),
                            label: label.clone(),
                            model,
                        });
                    }
                    (ProofResult::Refuted(_), ObligationSource::Candidate(id)) => {
                        refuted_now.insert(*id);
                    }
                    (ProofResult::Unknown(_), ObligationSource::Assertion(_)) => {}
                    (ProofResult::Unknown(reason), ObligationSource::Candidate(id)) => {
                        undet_now.entry(*id).or_insert(reason);
                    }
                }
            }
        }

        if refuted_now.is_empty() && undet_now.is_empty() {
            break;
        }
        for id in &refuted_now {
            active.remove(id);
            undet_now.remove(id);
            report.refuted.push(*id);
        }
        for (id, reason) in undet_now {
            active.remove(&id);
            report.undetermined.push((id, reason));
        }
    }

    report.verified = active.into_iter().collect();
    for &id in &report.verified {
        pool.get_mut(id).status = CandidateStatus::Verified;
    }
    for &id in &report.refuted {
        pool.get_mut(id).status = CandidateStatus::Refuted;
    }
    for (id, _) in &report.undetermined {
        pool.get_mut(*id).status = CandidateStatus::Undetermined;
    }
    Ok(report)
}

/// One round with `subset` enabled: true iff everything discharges. This
/// is the inductiveness check the fixpoint's survivors satisfy; the
/// maximality test compares it against every subset.
pub fn conjunction_holds(
    contract: &Contract,
    pool: &CandidatePool,
    subset: &[usize],
    assumed: &[(Scope, Predicate)],
    initial_state: &ContractState,
    config: &BackendConfig,
) -> bool {
    let run_config = RunConfig {
        width: config.width,
        k_addresses: config.k_addresses,
        ..RunConfig::default()
    };
    let ctx = EvalCtx::new(contract, &run_config);
    for &id in subset {
        let c = pool.get(id);
        if c.scope == Scope::ContractInv
            && !ctx.eval_on_state(&c.pred, initial_state).is_true()
        {
            return false;
        }
    }
    let refs: Vec<CandidateRef> = subset
        .iter()
        .map(|&id| {
            let c = pool.get(id);
            CandidateRef {
                id,
                scope: &c.scope,
                pred: &c.pred,
            }
        })
        .collect();
    contract.public_functions().all(|f| {
        gen_vcs(contract, &f.name, &refs, assumed, config)
            .expect("public function of the same contract")
            .iter()
            .all(|q| discharge(q, config).is_proved())
    })
}
