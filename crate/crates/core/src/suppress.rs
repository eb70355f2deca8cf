//! Redundancy suppression over the verified set: within each scope, a
//! predicate entailed by another verified predicate adds nothing to the
//! report and is dropped. Equivalent pairs keep the one with the smaller
//! canonical form, everything else is decided pairwise — the conjunction
//! of several survivors is never used as a premise, so each kept
//! predicate is individually strongest. An inconclusive entailment keeps
//! both sides.

use crate::lang::Contract;
use crate::logic::BackendConfig;
use crate::semantic::{entails, Entailment};
use crate::spec::{canonical_key, Predicate, Scope};

/// Which verified candidates to keep, as (scope, predicate) pairs in
/// deterministic order (scope, then canonical form).
pub fn suppress(
    contract: &Contract,
    verified: &[(Scope, Predicate)],
    config: &BackendConfig,
) -> Vec<(Scope, Predicate)> {
    let mut items: Vec<&(Scope, Predicate)> = verified.iter().collect();
    items.sort_by_key(|(s, p)| canonical_key(s, p));
    items.dedup_by_key(|x| canonical_key(&x.0, &x.1));

    let yes = |p: &Predicate, q: &Predicate, scope: &Scope| {
        entails(contract, scope, p, q, config) == Entailment::Yes
    };
    let mut kept: Vec<(Scope, Predicate)> = Vec::new();
    'outer: for (i, (scope, p)) in items.iter().enumerate() {
        for (j, (other_scope, q)) in items.iter().enumerate() {
            if i == j || scope != other_scope || !yes(q, p, scope) {
                continue;
            }
            // q is at least as strong as p. Drop p unless they are
            // equivalent and p is the canonically smaller spelling.
            if !yes(p, q, scope) || j < i {
                continue 'outer;
            }
        }
        kept.push((scope.clone(), p.clone()));
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_contract;
    use crate::spec::{parse_statement, print_statement, SpecStatement};

    const SRC: &str = r#"
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
        parse_contract("erc20.mc", SRC).unwrap()
    }

    fn cfg() -> BackendConfig {
        BackendConfig::default()
    }

    fn parsed(c: &Contract, lines: &[&str]) -> Vec<(Scope, Predicate)> {
        lines
            .iter()
            .map(|l| {
                let SpecStatement { scope, pred, .. } =
                    parse_statement("t.spec", l, c).unwrap();
                (scope, pred)
            })
            .collect()
    }

    fn printed(out: &[(Scope, Predicate)]) -> Vec<String> {
        out.iter()
            .map(|(s, p)| {
                print_statement(&SpecStatement { label: None, scope: s.clone(), pred: p.clone() })
            })
            .collect()
    }

    #[test]
    fn entailed_inequalities_are_dropped() {
        let c = erc20();
        let input = parsed(
            &c,
            &[
                "Ensures transfer: balances[to] == old(balances[to]) + tokens",
                "Ensures transfer: balances[to] >= old(balances[to])",
            ],
        );
        let out = suppress(&c, &input, &cfg());
        assert_eq!(
            printed(&out),
            ["Ensures transfer: balances[to] == old(balances[to]) + tokens"]
        );
    }

    #[test]
    fn conditional_facts_do_not_subsume_unconditional_ones() {
        let c = erc20();
        let input = parsed(
            &c,
            &[
                "Ensures transfer: to != a0 ==> balances[to] == old(balances[to]) + tokens",
                "Ensures transfer: balances[to] >= old(balances[to])",
            ],
        );
        let out = suppress(&c, &input, &cfg());
        assert_eq!(out.len(), 2, "the implication says nothing when to == a0");
    }

    #[test]
    fn equivalent_spellings_keep_the_smaller_form() {
        let c = erc20();
        let input = parsed(
            &c,
            &[
                "Requires transfer: tokens + 1 >= 1",
                "Requires transfer: tokens >= 0",
            ],
        );
        let out = suppress(&c, &input, &cfg());
        assert_eq!(printed(&out), ["Requires transfer: tokens + 1 >= 1"]);
    }

    #[test]
    fn scopes_never_suppress_across() {
        let c = erc20();
        let input = parsed(
            &c,
            &[
                "ContractInv totalSupply >= 0",
                "Requires transfer: totalSupply >= 0",
            ],
        );
        let out = suppress(&c, &input, &cfg());
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn singletons_pass_through() {
        let c = erc20();
        let input = parsed(&c, &["ContractInv SumMap(balances) == totalSupply"]);
        let out = suppress(&c, &input, &cfg());
        assert_eq!(out, input);
    }

    #[test]
    fn suppression_is_idempotent_and_conservative() {
        let c = erc20();
        let input = parsed(
            &c,
            &[
                "Ensures transfer: balances[to] == old(balances[to]) + tokens",
                "Ensures transfer: balances[to] >= old(balances[to])",
                "Ensures transfer: balances[from] <= old(balances[from])",
                "Ensures transfer: tokens >= 0",
                "Requires transfer: tokens <= totalSupply",
            ],
        );
        let once = suppress(&c, &input, &cfg());
        let twice = suppress(&c, &once, &cfg());
        assert_eq!(once, twice);
        // Everything dropped is recoverable from something kept.
        for (scope, p) in &input {
            let covered = once.iter().any(|(s, q)| {
                s == scope && entails(&c, scope, q, p, &cfg()) == Entailment::Yes
            });
            assert!(covered);
        }
    }
}
