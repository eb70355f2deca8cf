//! Scores a run's reported invariants against a hand-written ground
//! truth, using semantic entailment rather than string equality so that
//! logically equivalent spellings still count as recovered.

use crate::interp::{TraceSet, TxStatus};
use crate::lang::Contract;
use crate::logic::BackendConfig;
use crate::semantic::{entails, Entailment};
use crate::spec::{print_statement, Predicate, Scope, SpecStatement};
use serde::Serialize;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("ground truth scope names unknown function `{0}`")]
    UnknownFunction(String),
}

/// Precision over what was reported, and adjusted recall over the
/// ground truth restricted to exercised functions.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    /// Everything the run reported.
    pub produced: Vec<String>,
    /// The verified subset — identical to `produced` here, since only
    /// verified invariants are ever reported.
    pub proved: Vec<String>,
    pub ground_truth: Vec<String>,
    /// Ground truth restricted to functions the traces exercised.
    pub restricted: Vec<String>,
    pub recovered: Vec<String>,
    pub missed: Vec<String>,
    pub precision: f64,
    pub recall_adjusted: f64,
}

/// `(precision, adjusted recall)` from raw counts; an empty denominator
/// scores 1.0 (nothing asked for, nothing missed).
pub fn metrics(produced: usize, proved: usize, matched: usize, restricted: usize) -> (f64, f64) {
    let precision = if produced == 0 { 1.0 } else { proved as f64 / produced as f64 };
    let recall = if restricted == 0 { 1.0 } else { matched as f64 / restricted as f64 };
    (precision, recall)
}

/// A precondition or contract-invariant label is recovered when some
/// produced invariant of the same scope entails it. A postcondition
/// label may additionally lean on the ground truth's own preconditions
/// for that function: the run's postconditions are judged under the
/// entry conditions the label was written against.
pub fn evaluate(
    contract: &Contract,
    produced: &[(Scope, Predicate)],
    ground_truth: &[SpecStatement],
    traces: &TraceSet,
    config: &BackendConfig,
) -> Result<EvalReport, EvalError> {
    for s in ground_truth {
        if let Some(f) = s.scope.function() {
            if contract.function(f).is_none() {
                return Err(EvalError::UnknownFunction(f.to_string()));
            }
        }
    }

    let exercised: BTreeSet<&str> = traces
        .iter()
        .filter(|r| r.status == TxStatus::Success)
        .map(|r| r.call.function.as_str())
        .collect();
    let restricted: Vec<&SpecStatement> = ground_truth
        .iter()
        .filter(|s| match s.scope.function() {
            Some(f) => exercised.contains(f),
            None => true,
        })
        .collect();

    let mut recovered = Vec::new();
    let mut missed = Vec::new();
    for label in &restricted {
        let hit = match &label.scope {
            Scope::Requires(_) | Scope::ContractInv => produced
                .iter()
                .filter(|(s, _)| *s == label.scope)
                .any(|(s, p)| entails(contract, s, p, &label.pred, config) == Entailment::Yes),
            Scope::Ensures(f) => {
                let mut parts: Vec<Predicate> = produced
                    .iter()
                    .filter(|(s, _)| matches!(s, Scope::Ensures(g) if g == f))
                    .map(|(_, p)| p.clone())
                    .collect();
                parts.extend(
                    ground_truth
                        .iter()
                        .filter(|s| matches!(&s.scope, Scope::Requires(g) if g == f))
                        .map(|s| s.pred.clone()),
                );
                let known = Predicate::And(parts);
                entails(contract, &label.scope, &known, &label.pred, config)
                    == Entailment::Yes
            }
        };
        if hit {
            recovered.push(print_statement(label));
        } else {
            missed.push(print_statement(label));
        }
    }

    let produced_strs: Vec<String> = produced
        .iter()
        .map(|(s, p)| {
            print_statement(&SpecStatement { label: None, scope: s.clone(), pred: p.clone() })
        })
        .collect();
    let (precision, recall_adjusted) =
        metrics(produced.len(), produced.len(), recovered.len(), restricted.len());
    Ok(EvalReport {
        proved: produced_strs.clone(),
        produced: produced_strs,
        ground_truth: ground_truth.iter().map(print_statement).collect(),
        restricted: restricted.iter().map(|s| print_statement(s)).collect(),
        recovered,
        missed,
        precision,
        recall_adjusted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::{execute_call, Call, RunConfig};
    use crate::lang::parse_contract;
    use crate::spec::{parse_spec, parse_statement};
    use crate::value::{default_state, Value};
    use num_bigint::BigUint;

    const SRC: &str = r#"
contract Jar {
    uint level;

    function fill(uint n) public {
        require(n >= 1);
        level = level.add(n);
    }

    function drain() public {
        level = 0;
    }
}
"#;

    fn fixture() -> (Contract, TraceSet) {
        let c = parse_contract("jar.mc", SRC).unwrap();
        let config = RunConfig::default();
        let call = Call {
            function: "fill".into(),
            args: vec![Value::Uint(BigUint::from(2u32))],
            sender: 1,
            block: 1,
        };
        let state = default_state(&c);
        let rec = execute_call(&c, &config, &state, &call, 0).unwrap().record;
        (c, vec![rec])
    }

    fn invs(c: &Contract, lines: &[&str]) -> Vec<(Scope, Predicate)> {
        lines
            .iter()
            .map(|l| {
                let s = parse_statement("x.spec", l, c).unwrap();
                (s.scope, s.pred)
            })
            .collect()
    }

    #[test]
    fn uncalled_functions_fall_out_of_the_restricted_truth() {
        let (c, traces) = fixture();
        let gt = parse_spec(
            "gt.spec",
            "ContractInv level >= 0\n\
             Requires drain: level >= 1\n\
             Requires fill: n >= 1\n",
            &c,
        )
        .unwrap();
        let report =
            evaluate(&c, &[], &gt.statements, &traces, &BackendConfig::default()).unwrap();
        assert_eq!(report.restricted.len(), 2);
        assert!(report.restricted.iter().all(|s| !s.contains("drain")));
        assert_eq!(report.ground_truth.len(), 3);
    }

    #[test]
    fn same_scope_entailment_recovers_equivalent_spellings() {
        let (c, traces) = fixture();
        let produced = invs(&c, &["Requires fill: n + 1 >= 2"]);
        let gt = parse_spec("gt.spec", "Requires fill: n >= 1\n", &c).unwrap();
        let report =
            evaluate(&c, &produced, &gt.statements, &traces, &BackendConfig::default())
                .unwrap();
        assert_eq!(report.recovered.len(), 1);
        assert!(report.missed.is_empty());
        assert_eq!((report.precision, report.recall_adjusted), (1.0, 1.0));
    }

    #[test]
    fn postcondition_labels_lean_on_ground_truth_preconditions() {
        let (c, traces) = fixture();
        let produced = invs(&c, &["Ensures fill: level == old(level) + n"]);
        let gt = parse_spec(
            "gt.spec",
            "Requires fill: n >= 1\n\
             Ensures fill: level >= old(level) + 1\n",
            &c,
        )
        .unwrap();
        let report =
            evaluate(&c, &produced, &gt.statements, &traces, &BackendConfig::default())
                .unwrap();
        // The exact update alone admits n == 0; the label's own
        // precondition closes the gap.
        assert!(report.recovered.iter().any(|s| s.contains("Ensures")));
        assert!(report.recovered.iter().any(|s| s.contains("Requires")));
        assert_eq!(report.missed.len(), 0);
    }

    #[test]
    fn weaker_productions_do_not_recover_stronger_labels() {
        let (c, traces) = fixture();
        let produced = invs(&c, &["Ensures fill: level >= old(level)"]);
        let gt = parse_spec("gt.spec", "Ensures fill: level == old(level) + n\n", &c).unwrap();
        let report =
            evaluate(&c, &produced, &gt.statements, &traces, &BackendConfig::default())
                .unwrap();
        assert!(report.recovered.is_empty());
        assert_eq!(report.missed.len(), 1);
        assert_eq!(report.recall_adjusted, 0.0);
        assert_eq!(report.precision, 1.0);
    }

    #[test]
    fn the_counting_rules_are_plain_ratios_with_vacuous_ones() {
        assert_eq!(metrics(8, 8, 4, 5), (1.0, 0.8));
        assert_eq!(metrics(0, 0, 0, 0), (1.0, 1.0));
        assert_eq!(metrics(4, 3, 0, 2), (0.75, 0.0));
    }

    #[test]
    fn ground_truth_for_unknown_functions_is_rejected() {
        let (c, traces) = fixture();
        let mut gt = parse_spec("gt.spec", "ContractInv level >= 0\n", &c).unwrap();
        gt.statements[0].scope = Scope::Requires("mint".into());
        assert!(matches!(
            evaluate(&c, &[], &gt.statements, &traces, &BackendConfig::default()),
            Err(EvalError::UnknownFunction(f)) if f == "mint"
        ));
    }
}
