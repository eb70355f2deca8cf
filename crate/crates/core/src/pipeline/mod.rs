//! End-to-end inference: detect likely facts dynamically, verify them,
//! lift the failures into guarded implications, and weaken those until
//! they verify or the iteration budget runs out. Only verified
//! predicates are ever reported; the suppressor keeps the strongest of
//! them.
//!
//! Everything downstream of the traces is deterministic: candidate pools
//! iterate in insertion order, id sets in numeric order, and the final
//! report in canonical order, so a rerun over the same inputs prints the
//! same bytes.

mod check;
mod evaluate;
mod mutate;

pub use check::{check_state, check_trace, CheckError, Violation};
pub use evaluate::{evaluate, metrics, EvalError, EvalReport};
pub use mutate::{mutants, mutation_test, Mutant, MutationReport};

use crate::detect::{
    detect, initialize_candidates, CandidatePool, CandidateStatus, DetectError, TemplateCatalog,
};
use crate::houdini::{static_infer, VerifyError};
use crate::implication::{find_implications, weaken_implications, ImplicationError};
use crate::interp::{RunConfig, TraceSet};
use crate::lang::{Contract, DependenceRelation};
use crate::logic::BackendConfig;
use crate::spec::{Predicate, Scope};
use crate::suppress::suppress;
use crate::value::default_state;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone)]
pub struct Config {
    /// Fewest supporting records before a candidate is taken seriously.
    pub min_support: usize,
    /// Cap on verify-weaken rounds for implication candidates.
    pub max_weaken_iters: usize,
    pub backend: BackendConfig,
    pub catalog: TemplateCatalog,
}

impl Default for Config {
    fn default() -> Config {
        Config {
            min_support: 3,
            max_weaken_iters: 4,
            backend: BackendConfig::default(),
            catalog: TemplateCatalog::default(),
        }
    }
}

impl Config {
    /// Interpreter settings consistent with the prover's domains.
    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            width: self.backend.width,
            k_addresses: self.backend.k_addresses,
            ..RunConfig::default()
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Implication(#[from] ImplicationError),
}

/// One verify-weaken round over the implication candidates.
#[derive(Debug, Clone, Default)]
pub struct Round {
    pub verified: Vec<usize>,
    pub weakened: Vec<usize>,
}

/// Everything a run concluded, with enough intermediate structure to
/// audit each stage.
#[derive(Debug, Clone)]
pub struct InferenceRun {
    pub pool: CandidatePool,
    pub likely: Vec<usize>,
    pub partial: Vec<usize>,
    /// Outcome of verifying the likely primitives.
    pub step_one: crate::houdini::InferReport,
    /// Implication candidates built from the unverified primitives.
    pub implications: Vec<usize>,
    pub rounds: Vec<Round>,
    /// Every verified candidate id, in verification order.
    pub verified: Vec<usize>,
    /// The suppressed final report.
    pub report: Vec<(Scope, Predicate)>,
    pub loop_iterations: usize,
    /// Primitive candidates offered to the implication builder; the loop
    /// count stays within twice this number.
    pub implication_alphabet: usize,
}

/// Runs inference with the full template catalog seeding the pool.
pub fn run_inference(
    contract: &Contract,
    traces: &TraceSet,
    config: &Config,
) -> Result<InferenceRun, PipelineError> {
    let pool = initialize_candidates(contract);
    run(contract, traces, config, pool, Some(&config.catalog))
}

/// Runs inference over a caller-supplied candidate pool, without
/// template instantiation — the pool is the whole hypothesis space.
pub fn run_inference_with_pool(
    contract: &Contract,
    traces: &TraceSet,
    config: &Config,
    pool: CandidatePool,
) -> Result<InferenceRun, PipelineError> {
    run(contract, traces, config, pool, None)
}

fn run(
    contract: &Contract,
    traces: &TraceSet,
    config: &Config,
    mut pool: CandidatePool,
    catalog: Option<&TemplateCatalog>,
) -> Result<InferenceRun, PipelineError> {
    let run_config = config.run_config();
    let index = detect(contract, &run_config, catalog, config.min_support, &mut pool, traces)?;

    // The earliest recorded pre-state is the state the history actually
    // started from; contract invariants must already hold there.
    let initial = traces
        .iter()
        .min_by_key(|r| r.tx)
        .map(|r| r.pre.clone())
        .unwrap_or_else(|| default_state(contract));

    let likely: Vec<usize> =
        pool.with_status(CandidateStatus::Likely).map(|c| c.id).collect();
    let partial: Vec<usize> =
        pool.with_status(CandidateStatus::Partial).map(|c| c.id).collect();

    let step_one = static_infer(contract, &mut pool, &likely, &[], &initial, &config.backend)?;
    let mut verified = step_one.verified.clone();

    let deps = DependenceRelation::compute(contract);
    let verified_set: BTreeSet<usize> = verified.iter().copied().collect();
    let functions: Vec<String> =
        contract.public_functions().map(|f| f.name.clone()).collect();
    let mut implications = Vec::new();
    let mut alphabet = 0usize;
    for f in &functions {
        let ens = |id: &usize| matches!(&pool.get(*id).scope, Scope::Ensures(g) if g == f);
        let likely_f: Vec<usize> = likely
            .iter()
            .filter(|id| !verified_set.contains(id))
            .filter(|id| ens(id))
            .copied()
            .collect();
        let partial_f: Vec<usize> = partial.iter().filter(|id| ens(id)).copied().collect();
        alphabet += likely_f.len() + partial_f.len();
        implications
            .extend(find_implications(&mut pool, &likely_f, &partial_f, &deps, &index)?);
    }

    let mut rounds = Vec::new();
    let mut c_imp = implications.clone();
    while !c_imp.is_empty() && rounds.len() < config.max_weaken_iters {
        let assumed: Vec<(Scope, Predicate)> = verified
            .iter()
            .map(|&id| (pool.get(id).scope.clone(), pool.get(id).pred.clone()))
            .collect();
        let report =
            static_infer(contract, &mut pool, &c_imp, &assumed, &initial, &config.backend)?;
        verified.extend(report.verified.iter().copied());

        let survivors: BTreeSet<usize> = report.verified.iter().copied().collect();
        let unverified: Vec<usize> =
            c_imp.iter().filter(|id| !survivors.contains(id)).copied().collect();
        let mut weakened = Vec::new();
        for f in &functions {
            let group: Vec<usize> = unverified
                .iter()
                .filter(|id| matches!(&pool.get(**id).scope, Scope::Ensures(g) if g == f))
                .copied()
                .collect();
            weakened.extend(weaken_implications(contract, &mut pool, &group, &config.backend)?);
        }
        rounds.push(Round { verified: report.verified, weakened: weakened.clone() });
        c_imp = weakened;
    }

    let invs: Vec<(Scope, Predicate)> = verified
        .iter()
        .map(|&id| (pool.get(id).scope.clone(), pool.get(id).pred.clone()))
        .collect();
    let report = suppress(contract, &invs, &config.backend);

    Ok(InferenceRun {
        loop_iterations: rounds.len(),
        implication_alphabet: alphabet,
        pool,
        likely,
        partial,
        step_one,
        implications,
        rounds,
        verified,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::{generate_history, replay_history, TxStatus};
    use crate::lang::parse_contract;
    use crate::spec::{parse_statement, print_statement, SpecStatement};
    use crate::value::{ContractState, MapKey, Value};
    use num_bigint::BigUint;
    use std::collections::BTreeMap;

    const TOKEN_SRC: &str = r#"
contract Token {
    mapping(address => uint) balances;

    function transfer(address to, uint tokens) public {
        if (to == address(0)) {
            return;
        }
        balances[msg.sender] = balances[msg.sender].sub(tokens);
        balances[to] = balances[to].add(tokens);
    }
}
"#;

    fn token() -> Contract {
        parse_contract("token.mc", TOKEN_SRC).unwrap()
    }

    fn funded_state() -> ContractState {
        let entries: BTreeMap<MapKey, Value> = (1..=4)
            .map(|k| (MapKey::Addr(k), Value::Uint(BigUint::from(1000u32))))
            .collect();
        BTreeMap::from([("balances".into(), Value::Map(entries))])
    }

    fn token_traces(c: &Contract, n: usize, seed: u64) -> TraceSet {
        let run = Config::default().run_config();
        let calls = generate_history(c, &run, n, seed);
        replay_history(c, &run, &funded_state(), &calls)
            .unwrap()
            .into_iter()
            .map(|o| o.record)
            .collect()
    }

    fn seeded_pool(c: &Contract, lines: &[&str]) -> CandidatePool {
        let mut pool = CandidatePool::new();
        for line in lines {
            let s = parse_statement("pool.spec", line, c).unwrap();
            pool.insert(s.scope, s.pred).unwrap();
        }
        pool
    }

    fn printed(report: &[(Scope, Predicate)]) -> Vec<String> {
        report
            .iter()
            .map(|(s, p)| {
                print_statement(&SpecStatement {
                    label: None,
                    scope: s.clone(),
                    pred: p.clone(),
                })
            })
            .collect()
    }

    #[test]
    fn unsuccessful_traces_cannot_seed_inference() {
        let c = token();
        let err = run_inference(&c, &Vec::new(), &Config::default()).unwrap_err();
        assert!(matches!(err, PipelineError::Detect(DetectError::EmptyTrace)));
    }

    #[test]
    fn failed_primitives_come_back_as_weakened_implications() {
        let c = token();
        let pool = seeded_pool(
            &c,
            &[
                "ContractInv SumMap(balances) >= 0",
                "Ensures transfer: to != a0",
                "Ensures transfer: msg.sender != to",
                "Ensures transfer: balances[to] == old(balances[to]) + tokens",
            ],
        );
        let traces = token_traces(&c, 120, 3);
        let run = run_inference_with_pool(&c, &traces, &Config::default(), pool).unwrap();

        // Histories include self-transfers and zero-address sends, so the
        // three Ensures primitives fail dynamically or statically, pair
        // into two implications, and neither premise alone survives: the
        // zero-address guard refutes one consequence under aliasing, the
        // other premise cannot decide the guard branch.
        assert_eq!(run.implications.len(), 2);
        assert!(run.rounds[0].verified.is_empty());
        assert_eq!(run.rounds[0].weakened.len(), 1);
        assert_eq!(run.rounds[1].verified.len(), 1);
        assert_eq!(run.loop_iterations, 2);

        let got = printed(&run.report);
        assert!(
            got.contains(
                &"Ensures transfer: msg.sender != to && to != a0 ==> \
                  balances[to] == old(balances[to]) + tokens"
                    .to_string()
            ),
            "{got:?}"
        );
    }

    #[test]
    fn reruns_are_deterministic() {
        let c = token();
        let lines = [
            "ContractInv SumMap(balances) >= 0",
            "Ensures transfer: to != a0",
            "Ensures transfer: msg.sender != to",
            "Ensures transfer: balances[to] == old(balances[to]) + tokens",
        ];
        let traces = token_traces(&c, 120, 3);
        let a = run_inference_with_pool(
            &c, &traces, &Config::default(), seeded_pool(&c, &lines),
        )
        .unwrap();
        let b = run_inference_with_pool(
            &c, &traces, &Config::default(), seeded_pool(&c, &lines),
        )
        .unwrap();
        assert_eq!(printed(&a.report), printed(&b.report));
        assert_eq!(a.verified, b.verified);
    }

    #[test]
    fn the_loop_respects_both_iteration_bounds() {
        let c = token();
        for seed in [1u64, 5, 9] {
            let pool = seeded_pool(
                &c,
                &[
                    "Ensures transfer: to != a0",
                    "Ensures transfer: msg.sender != to",
                    "Ensures transfer: tokens <= 10",
                    "Ensures transfer: balances[to] == old(balances[to]) + tokens",
                    "Ensures transfer: balances[to] >= old(balances[to])",
                ],
            );
            let traces = token_traces(&c, 80, seed);
            let run =
                run_inference_with_pool(&c, &traces, &Config::default(), pool).unwrap();
            assert!(run.loop_iterations <= Config::default().max_weaken_iters);
            assert!(run.loop_iterations <= 2 * run.implication_alphabet.max(1));
        }
    }

    #[test]
    fn template_driven_runs_only_report_proved_facts() {
        let c = token();
        let traces = token_traces(&c, 120, 3);
        let cfg = Config::default();
        let run = run_inference(&c, &traces, &cfg).unwrap();
        assert!(!run.report.is_empty());
        for &id in &run.verified {
            assert_eq!(run.pool.get(id).status, CandidateStatus::Verified);
        }
        // Dynamic sanity: nothing reported is violated by its own
        // training data.
        let violations =
            check_trace(&c, &cfg.run_config(), &run.report, &traces).unwrap();
        assert!(violations.is_empty());
        let successes = traces.iter().filter(|r| r.status == TxStatus::Success).count();
        assert!(successes >= 30, "fixture produced too few successes: {successes}");
    }
}
