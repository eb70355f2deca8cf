//! Semantic queries between predicates, independent of any contract
//! execution: triviality (valid or unsatisfiable under the type domains)
//! and entailment. Both run over havoc'd states — fresh symbols
//! constrained only by their type ranges — so a verdict holds for every
//! reachable state. An inconclusive backend keeps the candidate alive:
//! `Neither` / `Unknown` are the conservative answers.

use crate::lang::Contract;
use crate::logic::{
    discharge, BackendConfig, Formula, Model, ObligationSource, ProofResult, VerificationQuery,
};
use crate::spec::{Predicate, Scope};
use crate::vcgen::{encode_predicate, havoc_env};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Triviality {
    Tautology,
    Contradiction,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Entailment {
    Yes,
    No(Option<Model>),
    Unknown,
}

fn query(
    env: &crate::vcgen::HavocEnv,
    assumptions: Vec<Formula>,
    obligation: Formula,
) -> VerificationQuery {
    let refs: Vec<&Formula> = assumptions.iter().chain([&obligation]).collect();
    let mut fs = env.symbols.bounds(&refs);
    fs.extend(assumptions);
    VerificationQuery {
        function: "<semantic>".into(),
        path: "havoc".into(),
        vars: env.symbols.vars.clone(),
        maps: env.symbols.maps.clone(),
        assumptions: fs,
        obligation,
        source: ObligationSource::Candidate(usize::MAX),
        blocked: None,
    }
}

/// Is `p` true under every type-respecting valuation, false under all of
/// them, or neither? Postcondition scopes are judged over two unrelated
/// states, so `x == old(x)` is correctly non-trivial.
pub fn classify_trivial(
    contract: &Contract,
    scope: &Scope,
    p: &Predicate,
    config: &BackendConfig,
) -> Triviality {
    let function = scope.function().and_then(|f| contract.function(f));
    let two_state = matches!(scope, Scope::Ensures(_));
    let env = havoc_env(contract, function, two_state, config);
    let Ok(f) = encode_predicate(&env.cx(contract), p) else {
        return Triviality::Neither;
    };
    if discharge(&query(&env, Vec::new(), f.clone()), config).is_proved() {
        return Triviality::Tautology;
    }
    if discharge(&query(&env, vec![f], Formula::False), config).is_proved() {
        return Triviality::Contradiction;
    }
    Triviality::Neither
}

/// Does `p` entail `q` under every type-respecting valuation of their
/// shared scope?
pub fn entails(
    contract: &Contract,
    scope: &Scope,
    p: &Predicate,
    q: &Predicate,
    config: &BackendConfig,
) -> Entailment {
    let function = scope.function().and_then(|f| contract.function(f));
    let two_state = matches!(scope, Scope::Ensures(_));
    let env = havoc_env(contract, function, two_state, config);
    let ecx = env.cx(contract);
    let (Ok(fp), Ok(fq)) = (encode_predicate(&ecx, p), encode_predicate(&ecx, q)) else {
        return Entailment::Unknown;
    };
    match discharge(&query(&env, vec![fp], fq), config) {
        ProofResult::Proved => Entailment::Yes,
        ProofResult::Refuted(m) => Entailment::No(m),
        ProofResult::Unknown(_) => Entailment::Unknown,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::RunConfig;
    use crate::lang::parse_contract;
    use crate::spec::{parse_statement, Bool3, EvalCtx, SpecStatement};
    use crate::value::Value;
    use num_bigint::BigUint;
    use std::collections::BTreeMap;

    const ERC20_SRC: &str = r#"
contract ERC20 {
    uint totalSupply;
    mapping(address => uint) balances;

    function transfer(address from, address to, uint tokens) public {
        balances[from] = balances[from].sub(tokens);
        balances[to] = balances[to].add(tokens);
    }
}
"#;

    fn erc20() -> Contract {
        parse_contract("erc20.mc", ERC20_SRC).unwrap()
    }

    fn cfg() -> BackendConfig {
        BackendConfig::default()
    }

    fn stmt(c: &Contract, line: &str) -> SpecStatement {
        parse_statement("t.spec", line, c).unwrap()
    }

    #[test]
    fn unsigned_bounds_make_tautologies() {
        let c = erc20();
        let s = stmt(&c, "Ensures transfer: tokens >= 0");
        assert_eq!(
            classify_trivial(&c, &s.scope, &s.pred, &cfg()),
            Triviality::Tautology
        );
    }

    #[test]
    fn bottom_is_a_contradiction() {
        let c = erc20();
        let s = stmt(&c, "Requires transfer: false");
        assert_eq!(
            classify_trivial(&c, &s.scope, &s.pred, &cfg()),
            Triviality::Contradiction
        );
    }

    #[test]
    fn satisfiable_refutable_predicates_are_neither() {
        let c = erc20();
        for line in [
            "Requires transfer: from != to",
            "Ensures transfer: balances[to] == old(balances[to])",
            "ContractInv totalSupply == 0",
        ] {
            let s = stmt(&c, line);
            assert_eq!(
                classify_trivial(&c, &s.scope, &s.pred, &cfg()),
                Triviality::Neither,
                "{line}"
            );
        }
    }

    #[test]
    fn entailment_is_reflexive() {
        let c = erc20();
        let s = stmt(&c, "Ensures transfer: balances[to] >= old(balances[to])");
        assert_eq!(entails(&c, &s.scope, &s.pred, &s.pred, &cfg()), Entailment::Yes);
    }

    #[test]
    fn exact_updates_entail_monotone_bounds() {
        let c = erc20();
        let p = stmt(&c, "Ensures transfer: balances[to] == old(balances[to]) + tokens");
        let q = stmt(&c, "Ensures transfer: balances[to] >= old(balances[to])");
        assert_eq!(entails(&c, &p.scope, &p.pred, &q.pred, &cfg()), Entailment::Yes);
        assert!(matches!(
            entails(&c, &p.scope, &q.pred, &p.pred, &cfg()),
            Entailment::No(_)
        ));
    }

    #[test]
    fn non_entailment_carries_a_witness() {
        let c = erc20();
        let p = stmt(&c, "Requires transfer: from != to");
        let q = stmt(&c, "Requires transfer: to != a0");
        let Entailment::No(Some(model)) = entails(&c, &p.scope, &p.pred, &q.pred, &cfg()) else {
            panic!("distinct from/to do not force to away from a0");
        };
        use crate::logic::CVal;
        assert_eq!(model.get("to"), Some(&CVal::Addr(0)));
        assert_ne!(model.get("from"), Some(&CVal::Addr(0)));
    }

    #[test]
    fn out_of_fragment_predicates_stay_unknown() {
        let c = erc20();
        let p = stmt(&c, "Requires transfer: tokens / 2 == 0");
        assert_eq!(classify_trivial(&c, &p.scope, &p.pred, &cfg()), Triviality::Neither);
        let q = stmt(&c, "Requires transfer: tokens >= 0");
        assert_eq!(entails(&c, &p.scope, &p.pred, &q.pred, &cfg()), Entailment::Unknown);
    }

    #[test]
    fn backend_verdicts_agree_with_exhaustive_enumeration() {
        let src = r#"
contract Tiny {
    uint x;
    uint y;
}
"#;
        let c = parse_contract("tiny.mc", src).unwrap();
        let narrow = BackendConfig { width: 4, ..BackendConfig::default() };
        let run = RunConfig { width: 4, ..RunConfig::default() };
        let ctx = EvalCtx::new(&c, &run);
        for line in [
            "ContractInv x + y >= x",
            "ContractInv x <= 15",
            "ContractInv x + 1 <= 15",
            "ContractInv x >= 8",
            "ContractInv x < 0",
            "ContractInv x + y == y + x",
            "ContractInv x - x > 0",
        ] {
            let s = stmt(&c, line);
            let verdict = classify_trivial(&c, &s.scope, &s.pred, &narrow);
            let (mut all_true, mut all_false) = (true, true);
            for x in 0u64..16 {
                for y in 0u64..16 {
                    let state: crate::value::ContractState = BTreeMap::from([
                        ("x".into(), Value::Uint(BigUint::from(x))),
                        ("y".into(), Value::Uint(BigUint::from(y))),
                    ]);
                    match ctx.eval_on_state(&s.pred, &state) {
                        Bool3::True => all_false = false,
                        Bool3::False => all_true = false,
                        Bool3::Undef => {
                            all_true = false;
                            all_false = false;
                        }
                    }
                }
            }
            let expected = match (all_true, all_false) {
                (true, _) => Triviality::Tautology,
                (_, true) => Triviality::Contradiction,
                _ => Triviality::Neither,
            };
            assert_eq!(verdict, expected, "{line}");
        }
    }
}
