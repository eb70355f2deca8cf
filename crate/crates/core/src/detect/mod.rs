//! Dynamic detection: classify candidate predicates against the successful
//! records of a trace set.
//!
//! A candidate's counters partition the records relevant to its scope
//! (every successful record for `ContractInv`, the function's successful
//! records otherwise) into support, refutations, and undefined. With
//! `min_support` met, zero refutations classify it likely and at least one
//! classifies it partial; undefined records count toward neither.

pub mod bits;
pub mod pool;
pub mod templates;

pub use bits::Bits;
pub use pool::{Candidate, CandidatePool, CandidateStatus};
pub use templates::{initialize_candidates, TemplateCatalog};

use crate::interp::{ExecutionRecord, RunConfig, TxStatus};
use crate::lang::ast::Contract;
use crate::spec::{Bool3, CmpOp, EvalCtx, Predicate, Scope, SpecExpr};
use num_bigint::BigInt;
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DetectError {
    #[error("trace set has no successful records")]
    EmptyTrace,
}

/// Per-record support computed during detection, kept for the implication
/// stage: which records back each candidate, and which records of each
/// function actually changed state.
#[derive(Debug, Clone, Default)]
pub struct SupportIndex {
    supp: HashMap<usize, Bits>,
    changed: HashMap<String, Bits>,
}

impl SupportIndex {
    /// Support bitset of a candidate, over its scope's successful records
    /// in trace order.
    pub fn support_bits(&self, id: usize) -> Option<&Bits> {
        self.supp.get(&id)
    }

    /// Mask of a function's successful records whose post-state differs
    /// from their pre-state.
    pub fn changed_mask(&self, function: &str) -> Option<&Bits> {
        self.changed.get(function)
    }

    /// An implication `premise ==> consequence` is justified by the data
    /// when, over the records that changed state, the consequence holds
    /// somewhere and only where the premise holds: the consequence's
    /// support must be a nonempty subset of the premise's.
    pub fn data_justified(&self, premise: &Candidate, consequence: &Candidate) -> bool {
        let (Scope::Ensures(pf), Scope::Ensures(cf)) = (&premise.scope, &consequence.scope)
        else {
            return false;
        };
        if pf != cf {
            return false;
        }
        let (Some(sp), Some(sc), Some(ch)) =
            (self.supp.get(&premise.id), self.supp.get(&consequence.id), self.changed.get(pf))
        else {
            return false;
        };
        let tau_changed = sc.and(ch);
        tau_changed.any() && tau_changed.is_subset_of(sp)
    }
}

/// Evaluate every candidate in the pool over the successful records,
/// update its counters and status, and return the support index.
///
/// Constant and extremum templates (`X == c`, `X <= max`, `X >= min`) are
/// instantiated here from the observed values before classification, since
/// they do not exist until data has been seen.
pub fn detect(
    contract: &Contract,
    config: &RunConfig,
    catalog: Option<&TemplateCatalog>,
    min_support: usize,
    pool: &mut CandidatePool,
    traces: &[ExecutionRecord],
) -> Result<SupportIndex, DetectError> {
    let successes: Vec<usize> = traces
        .iter()
        .enumerate()
        .filter(|(_, r)| r.status == TxStatus::Success)
        .map(|(i, _)| i)
        .collect();
    if successes.is_empty() {
        return Err(DetectError::EmptyTrace);
    }
    let mut by_fn: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for &i in &successes {
        by_fn.entry(traces[i].call.function.clone()).or_default().push(i);
    }

    let ctx = EvalCtx::new(contract, config);
    if let Some(catalog) = catalog {
        instantiate_value_templates(&ctx, contract, catalog, pool, traces, &successes, &by_fn);
    }

    let empty: Vec<usize> = Vec::new();
    let mut results: Vec<(usize, usize, usize, usize, Bits)> = Vec::with_capacity(pool.len());
    for cand in pool.iter() {
        let recs = match cand.scope.function() {
            None => &successes,
            Some(f) => by_fn.get(f).unwrap_or(&empty),
        };
        let mut bits = Bits::new(recs.len());
        let (mut sup, mut refut, mut undef) = (0usize, 0usize, 0usize);
        for (pos, &ri) in recs.iter().enumerate() {
            match ctx.eval_on_record(&cand.scope, &cand.pred, &traces[ri]) {
                Some(Bool3::True) => {
                    sup += 1;
                    bits.set(pos);
                }
                Some(Bool3::False) => refut += 1,
                Some(Bool3::Undef) => undef += 1,
                None => {}
            }
        }
        results.push((cand.id, sup, refut, undef, bits));
    }

    let mut supp = HashMap::with_capacity(results.len());
    for (id, sup, refut, undef, bits) in results {
        let c = pool.get_mut(id);
        c.support = sup;
        c.refutations = refut;
        c.undefined = undef;
        c.status = if sup < min_support {
            CandidateStatus::Discarded
        } else if refut == 0 {
            CandidateStatus::Likely
        } else {
            CandidateStatus::Partial
        };
        supp.insert(id, bits);
    }

    let mut changed = HashMap::new();
    for (f, recs) in &by_fn {
        let mut mask = Bits::new(recs.len());
        for (pos, &ri) in recs.iter().enumerate() {
            if traces[ri].pre != traces[ri].post {
                mask.set(pos);
            }
        }
        changed.insert(f.clone(), mask);
    }

    Ok(SupportIndex { supp, changed })
}

/// Instantiate `X == c` for each value a numeric term was observed to take
/// (capped), plus `X <= max` and `X >= min` over the observed range. The
/// lower bound is dropped when it is trivial for the term's machine type.
fn instantiate_value_templates(
    ctx: &EvalCtx,
    contract: &Contract,
    catalog: &TemplateCatalog,
    pool: &mut CandidatePool,
    traces: &[ExecutionRecord],
    successes: &[usize],
    by_fn: &BTreeMap<String, Vec<usize>>,
) {
    let mut scopes = vec![Scope::ContractInv];
    for f in contract.public_functions() {
        scopes.push(Scope::Requires(f.name.clone()));
        scopes.push(Scope::Ensures(f.name.clone()));
    }
    let empty: Vec<usize> = Vec::new();
    for scope in scopes {
        let recs = match scope.function() {
            None => successes,
            Some(f) => by_fn.get(f).unwrap_or(&empty),
        };
        for term in templates::scope_terms(contract, &scope) {
            let templates::TermKind::Num { nonneg } = term.kind else { continue };
            if matches!(scope, Scope::Ensures(_)) && !templates::ensures_shape_ok(&[&term.expr]) {
                continue;
            }
            let mut vals: BTreeSet<BigInt> = BTreeSet::new();
            for &ri in recs {
                let rec = &traces[ri];
                if scope == Scope::ContractInv {
                    vals.extend(ctx.numeric_value_on_state(&term.expr, &rec.pre));
                    vals.extend(ctx.numeric_value_on_state(&term.expr, &rec.post));
                } else {
                    vals.extend(ctx.numeric_value(&scope, &term.expr, rec));
                }
            }
            let (Some(min), Some(max)) = (vals.first(), vals.last()) else { continue };
            if vals.len() <= catalog.max_constants {
                for c in &vals {
                    let atom =
                        Predicate::atom(CmpOp::Eq, term.expr.clone(), SpecExpr::Int(c.clone()));
                    pool.insert(scope.clone(), atom);
                }
            }
            let upper =
                Predicate::atom(CmpOp::Le, term.expr.clone(), SpecExpr::Int(max.clone()));
            pool.insert(scope.clone(), upper);
            if !(nonneg && min.is_zero()) {
                let lower =
                    Predicate::atom(CmpOp::Ge, term.expr.clone(), SpecExpr::Int(min.clone()));
                pool.insert(scope.clone(), lower);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::Call;
    use crate::lang::parse_contract;
    use crate::spec::Phase;
    use crate::value::Value;

    fn counter() -> Contract {
        let src = r#"
contract Counter {
    uint total;

    function bump(uint v) public {
        total = total.add(v);
    }

    function reset() public {
        total = 0;
    }
}
"#;
        parse_contract("counter.mc", src).expect("parses")
    }

    fn state(total: u64) -> crate::value::ContractState {
        BTreeMap::from([("total".to_string(), Value::Uint(total.into()))])
    }

    fn bump(tx: u64, v: u64, pre: u64, post: u64) -> ExecutionRecord {
        ExecutionRecord {
            tx,
            status: TxStatus::Success,
            call: Call {
                function: "bump".into(),
                args: BTreeMap::from([("v".to_string(), Value::Uint(v.into()))]),
                sender: 1,
                block: tx,
            },
            pre: state(pre),
            post: state(post),
        }
    }

    fn total(phase: Phase) -> SpecExpr {
        SpecExpr::StateVar { name: "total".into(), phase }
    }

    fn update_pred() -> Predicate {
        Predicate::atom(
            CmpOp::Eq,
            total(Phase::Post),
            SpecExpr::Arith(
                crate::spec::ArithOp::Add,
                Box::new(total(Phase::Pre)),
                Box::new(SpecExpr::Param("v".into())),
            ),
        )
    }

    #[test]
    fn empty_trace_is_an_error() {
        let contract = counter();
        let config = RunConfig::default();
        let catalog = TemplateCatalog::default();
        let mut pool = CandidatePool::new();
        pool.insert(Scope::Ensures("bump".into()), update_pred());

        let err = detect(&contract, &config, Some(&catalog), 3, &mut pool.clone(), &[]);
        assert_eq!(err.unwrap_err(), DetectError::EmptyTrace);

        let mut reverted = bump(0, 1, 5, 5);
        reverted.status = TxStatus::Reverted;
        let err = detect(&contract, &config, Some(&catalog), 3, &mut pool, &[reverted]);
        assert_eq!(err.unwrap_err(), DetectError::EmptyTrace);
    }

    #[test]
    fn classification_respects_min_support() {
        let contract = counter();
        let config = RunConfig::default();
        let catalog = TemplateCatalog::default();
        let traces =
            vec![bump(0, 5, 0, 5), bump(1, 3, 5, 8), bump(2, 0, 8, 8), bump(3, 2, 8, 10)];

        // Holds on all four records.
        let always = update_pred();
        // Holds on three of four.
        let usually =
            Predicate::atom(CmpOp::Ne, SpecExpr::Param("v".into()), SpecExpr::Int(0.into()));

        let mut pool = CandidatePool::new();
        let a = pool.insert(Scope::Ensures("bump".into()), always).unwrap();
        let u = pool.insert(Scope::Ensures("bump".into()), usually).unwrap();

        let mut at3 = pool.clone();
        detect(&contract, &config, Some(&catalog), 3, &mut at3, &traces).unwrap();
        assert_eq!(at3.get(a).status, CandidateStatus::Likely);
        assert_eq!(at3.get(a).support, 4);
        assert_eq!(at3.get(u).status, CandidateStatus::Partial);
        assert_eq!((at3.get(u).support, at3.get(u).refutations), (3, 1));

        // Raising the bar past the observed support discards both.
        let mut at5 = pool.clone();
        detect(&contract, &config, Some(&catalog), 5, &mut at5, &traces).unwrap();
        assert_eq!(at5.get(a).status, CandidateStatus::Discarded);
        assert_eq!(at5.get(u).status, CandidateStatus::Discarded);

        // A refuted candidate needs min_support true records, not calls.
        let mut at4 = pool.clone();
        detect(&contract, &config, Some(&catalog), 4, &mut at4, &traces).unwrap();
        assert_eq!(at4.get(a).status, CandidateStatus::Likely);
        assert_eq!(at4.get(u).status, CandidateStatus::Discarded);
    }

    #[test]
    fn undefined_records_count_toward_neither_side() {
        let contract = counter();
        let config = RunConfig::default();
        let catalog = TemplateCatalog::default();
        // total / v faults when v == 0.
        let ratio = Predicate::atom(
            CmpOp::Ge,
            SpecExpr::Arith(
                crate::spec::ArithOp::Div,
                Box::new(total(Phase::Post)),
                Box::new(SpecExpr::Param("v".into())),
            ),
            SpecExpr::Int(1.into()),
        );
        let mut pool = CandidatePool::new();
        let id = pool.insert(Scope::Ensures("bump".into()), ratio).unwrap();

        let traces =
            vec![bump(0, 5, 0, 5), bump(1, 3, 5, 8), bump(2, 0, 8, 8), bump(3, 2, 8, 10)];
        detect(&contract, &config, Some(&catalog), 3, &mut pool, &traces).unwrap();

        let c = pool.get(id);
        assert_eq!((c.support, c.refutations, c.undefined), (3, 0, 1));
        assert_eq!(c.status, CandidateStatus::Likely);
        assert_eq!(c.support + c.refutations + c.undefined, traces.len());
    }

    #[test]
    fn counters_partition_the_scope_records() {
        let contract = counter();
        let config = RunConfig::default();
        let catalog = TemplateCatalog::default();
        let mut traces = vec![
            bump(0, 5, 0, 5),
            bump(1, 3, 5, 8),
            bump(2, 0, 8, 8),
            bump(3, 7, 8, 15),
            ExecutionRecord {
                tx: 4,
                status: TxStatus::Success,
                call: Call {
                    function: "reset".into(),
                    args: BTreeMap::new(),
                    sender: 2,
                    block: 4,
                },
                pre: state(15),
                post: state(0),
            },
        ];
        let mut failed = bump(5, 9, 0, 0);
        failed.status = TxStatus::Reverted;
        traces.push(failed);

        let mut pool = initialize_candidates(&contract);
        let index = detect(&contract, &config, Some(&catalog), 3, &mut pool, &traces).unwrap();

        for c in pool.iter() {
            let relevant = match c.scope.function() {
                None => 5,
                Some("bump") => 4,
                Some("reset") => 1,
                Some(_) => unreachable!(),
            };
            assert_eq!(
                c.support + c.refutations + c.undefined,
                relevant,
                "counters do not partition records for {}",
                c.key()
            );
            assert_eq!(index.support_bits(c.id).unwrap().count(), c.support);
            assert_eq!(index.support_bits(c.id).unwrap().len(), relevant);
        }
    }

    #[test]
    fn detection_matches_naive_reclassification() {
        let contract = counter();
        let config = RunConfig::default();
        let catalog = TemplateCatalog::default();
        // Deterministic pseudo-random workload, under 20 records.
        let mut traces = Vec::new();
        let mut seed: u64 = 0x9e37;
        let mut cur: u64 = 0;
        for tx in 0..18 {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let v = seed >> 58;
            if seed % 5 == 0 {
                let mut r = bump(tx, v, cur, cur);
                r.status = TxStatus::Reverted;
                traces.push(r);
            } else if seed % 7 == 0 {
                traces.push(ExecutionRecord {
                    tx,
                    status: TxStatus::Success,
                    call: Call {
                        function: "reset".into(),
                        args: BTreeMap::new(),
                        sender: 1,
                        block: tx,
                    },
                    pre: state(cur),
                    post: state(0),
                });
                cur = 0;
            } else {
                traces.push(bump(tx, v, cur, cur + v));
                cur += v;
            }
        }

        let min_support = 3;
        let mut pool = initialize_candidates(&contract);
        detect(&contract, &config, Some(&catalog), min_support, &mut pool, &traces).unwrap();

        let ctx = EvalCtx::new(&contract, &config);
        for c in pool.iter() {
            let (mut sup, mut refut, mut undef) = (0, 0, 0);
            for rec in &traces {
                if rec.status != TxStatus::Success {
                    continue;
                }
                if let Some(f) = c.scope.function() {
                    if rec.call.function != f {
                        continue;
                    }
                }
                match ctx.eval_on_record(&c.scope, &c.pred, rec) {
                    Some(Bool3::True) => sup += 1,
                    Some(Bool3::False) => refut += 1,
                    Some(Bool3::Undef) => undef += 1,
                    None => {}
                }
            }
            let expected = if sup < min_support {
                CandidateStatus::Discarded
            } else if refut == 0 {
                CandidateStatus::Likely
            } else {
                CandidateStatus::Partial
            };
            assert_eq!(
                (c.support, c.refutations, c.undefined, c.status),
                (sup, refut, undef, expected),
                "detection disagrees with naive evaluation on {}",
                c.key()
            );
        }
    }

    #[test]
    fn record_order_does_not_change_statuses() {
        let contract = counter();
        let config = RunConfig::default();
        let catalog = TemplateCatalog::default();
        let traces =
            vec![bump(0, 5, 0, 5), bump(1, 0, 5, 5), bump(2, 3, 5, 8), bump(3, 2, 8, 10)];
        let mut shuffled = traces.clone();
        shuffled.reverse();
        shuffled.rotate_left(1);

        let mut a = initialize_candidates(&contract);
        detect(&contract, &config, Some(&catalog), 3, &mut a, &traces).unwrap();
        let mut b = initialize_candidates(&contract);
        detect(&contract, &config, Some(&catalog), 3, &mut b, &shuffled).unwrap();

        let snapshot = |pool: &CandidatePool| -> BTreeMap<String, (usize, usize, usize, CandidateStatus)> {
            pool.iter()
                .map(|c| (c.key(), (c.support, c.refutations, c.undefined, c.status)))
                .collect()
        };
        assert_eq!(snapshot(&a), snapshot(&b));
    }

    #[test]
    fn constants_and_extrema_come_from_observations() {
        let contract = counter();
        let config = RunConfig::default();
        let catalog = TemplateCatalog::default();
        let traces = vec![bump(0, 10, 0, 10), bump(1, 15, 10, 25), bump(2, 10, 25, 35)];
        let mut pool = initialize_candidates(&contract);
        detect(&contract, &config, Some(&catalog), 3, &mut pool, &traces).unwrap();

        let inv = Scope::ContractInv;
        let t = || total(Phase::Pre);
        // Observed values of `total` across pre and post states: 0..35.
        assert!(pool.contains(&inv, &Predicate::atom(CmpOp::Le, t(), SpecExpr::Int(35.into()))));
        assert!(pool.contains(&inv, &Predicate::atom(CmpOp::Eq, t(), SpecExpr::Int(25.into()))));
        // The trivial lower bound of an unsigned term is not instantiated.
        assert!(!pool.contains(&inv, &Predicate::atom(CmpOp::Ge, t(), SpecExpr::Int(0.into()))));

        // Parameter observations feed function-scope constants.
        assert!(pool.contains(
            &Scope::Requires("bump".into()),
            &Predicate::atom(CmpOp::Ge, SpecExpr::Param("v".into()), SpecExpr::Int(10.into()))
        ));
    }

    #[test]
    fn equality_constants_stop_past_the_cap() {
        let contract = counter();
        let config = RunConfig::default();
        let catalog = TemplateCatalog { max_constants: 2 };
        let traces = vec![bump(0, 10, 0, 10), bump(1, 15, 10, 25), bump(2, 10, 25, 35)];
        let mut pool = initialize_candidates(&contract);
        detect(&contract, &config, Some(&catalog), 3, &mut pool, &traces).unwrap();

        let inv = Scope::ContractInv;
        let t = || total(Phase::Pre);
        // Four distinct observations exceed the cap of two: no equalities,
        // but the range bound stays.
        assert!(!pool.contains(&inv, &Predicate::atom(CmpOp::Eq, t(), SpecExpr::Int(25.into()))));
        assert!(pool.contains(&inv, &Predicate::atom(CmpOp::Le, t(), SpecExpr::Int(35.into()))));
    }

    #[test]
    fn changed_mask_backs_data_justification() {
        let src = r#"
contract Gate {
    uint x;

    function poke(bool doit) public {
        if (doit) {
            x = x.add(1);
        }
    }
}
"#;
        let contract = parse_contract("gate.mc", src).expect("parses");
        let config = RunConfig::default();
        let catalog = TemplateCatalog::default();
        let mk = |tx: u64, doit: bool, pre: u64, post: u64| ExecutionRecord {
            tx,
            status: TxStatus::Success,
            call: Call {
                function: "poke".into(),
                args: BTreeMap::from([("doit".to_string(), Value::Bool(doit))]),
                sender: 1,
                block: tx,
            },
            pre: BTreeMap::from([("x".to_string(), Value::Uint(pre.into()))]),
            post: BTreeMap::from([("x".to_string(), Value::Uint(post.into()))]),
        };
        let traces = vec![
            mk(0, true, 0, 1),
            mk(1, false, 1, 1),
            mk(2, true, 1, 2),
            mk(3, false, 2, 2),
            mk(4, true, 2, 3),
        ];

        let ens = Scope::Ensures("poke".into());
        let x = |phase| SpecExpr::StateVar { name: "x".into(), phase };
        let mut pool = CandidatePool::new();
        let on = pool
            .insert(
                ens.clone(),
                Predicate::atom(CmpOp::Eq, SpecExpr::Param("doit".into()), SpecExpr::Bool(true)),
            )
            .unwrap();
        let off = pool
            .insert(
                ens.clone(),
                Predicate::atom(CmpOp::Eq, SpecExpr::Param("doit".into()), SpecExpr::Bool(false)),
            )
            .unwrap();
        let bumped = pool
            .insert(
                ens.clone(),
                Predicate::atom(
                    CmpOp::Eq,
                    x(Phase::Post),
                    SpecExpr::Arith(
                        crate::spec::ArithOp::Add,
                        Box::new(x(Phase::Pre)),
                        Box::new(SpecExpr::Int(1.into())),
                    ),
                ),
            )
            .unwrap();

        let index = detect(&contract, &config, Some(&catalog), 3, &mut pool, &traces).unwrap();

        let mask = index.changed_mask("poke").unwrap();
        assert_eq!(mask.iter_ones().collect::<Vec<_>>(), vec![0, 2, 4]);

        // The bump consequence holds exactly on the changed records, all of
        // which satisfy `doit == true` — and none satisfy `doit == false`.
        assert!(index.data_justified(pool.get(on), pool.get(bumped)));
        assert!(!index.data_justified(pool.get(off), pool.get(bumped)));
        // Scope mismatches are never justified.
        let other = Candidate {
            id: bumped,
            scope: Scope::Requires("poke".into()),
            pred: Predicate::False,
            support: 0,
            refutations: 0,
            undefined: 0,
            status: CandidateStatus::Pending,
        };
        assert!(!index.data_justified(pool.get(on), &other));
    }
}
