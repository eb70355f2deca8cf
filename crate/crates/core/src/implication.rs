//! Implication candidate construction and weakening.
//!
//! When a primitive postcondition fails verification, the fact it
//! describes may still hold conditionally. [`find_implications`] pairs the
//! failed and partially-true primitives of one function into `premise ==>
//! consequence` candidates, pruned hard: the premise must be decidable at
//! entry, the consequence must describe an update, some premise variable
//! must flow into a consequence variable, and the trace data must justify
//! the direction — every state-changing record satisfying the consequence
//! also satisfied the premise.
//!
//! [`weaken_implications`] retries failed implications with weaker
//! shapes: conjoining the premises of two failures that share a
//! consequence, or disjoining the consequences of two that share a
//! premise. Conjunction weakening runs first; disjunction weakening only
//! fires on rounds where no conjunction is available. Canonical ordering
//! of chain members and the pool's seen-set make re-derivation a no-op,
//! which is what bounds the weakening loop.

use crate::detect::{CandidatePool, SupportIndex};
use crate::lang::{Contract, DependenceRelation};
use crate::logic::BackendConfig;
use crate::semantic::{classify_trivial, Triviality};
use crate::spec::{print_pred, Phase, Predicate, Scope, SpecExpr};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ImplicationError {
    #[error("implication inputs span scopes `{0}` and `{1}`")]
    ScopeMismatch(String, String),
}

fn expr_names(e: &SpecExpr, out: &mut BTreeSet<String>) {
    match e {
        SpecExpr::StateVar { name, .. } => {
            out.insert(name.clone());
        }
        SpecExpr::Param(name) => {
            out.insert(name.clone());
        }
        SpecExpr::MsgSender => {
            out.insert("msg.sender".into());
        }
        SpecExpr::BlockNumber => {
            out.insert("block.number".into());
        }
        SpecExpr::Len(a) | SpecExpr::SumMap(a) => expr_names(a, out),
        SpecExpr::Member(a, _) => expr_names(a, out),
        SpecExpr::Index(a, b) | SpecExpr::Arith(_, a, b) => {
            expr_names(a, out);
            expr_names(b, out);
        }
        SpecExpr::Int(_)
        | SpecExpr::Bool(_)
        | SpecExpr::Addr(_)
        | SpecExpr::Str(_)
        | SpecExpr::MaxValue => {}
    }
}

fn pred_names(p: &Predicate) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut stack = vec![p];
    while let Some(p) = stack.pop() {
        match p {
            Predicate::False => {}
            Predicate::Atom(_, a, b) => {
                expr_names(a, &mut out);
                expr_names(b, &mut out);
            }
            Predicate::And(ps) | Predicate::Or(ps) => stack.extend(ps),
            Predicate::Implies(a, b) => stack.extend([a.as_ref(), b.as_ref()]),
        }
    }
    out
}

fn mentions_post(p: &Predicate) -> bool {
    match p {
        Predicate::False => false,
        Predicate::Atom(_, a, b) => {
            use crate::detect::templates::mentions_phase;
            mentions_phase(a, Phase::Post) || mentions_phase(b, Phase::Post)
        }
        Predicate::And(ps) | Predicate::Or(ps) => ps.iter().any(mentions_post),
        Predicate::Implies(a, b) => mentions_post(a) || mentions_post(b),
    }
}

fn is_primitive(p: &Predicate) -> bool {
    matches!(p, Predicate::False | Predicate::Atom(..))
}

fn shared_scope<'a>(
    pool: &'a CandidatePool,
    ids: &[usize],
) -> Result<Option<&'a Scope>, ImplicationError> {
    let mut scope: Option<&Scope> = None;
    for &id in ids {
        let s = &pool.get(id).scope;
        match scope {
            None => scope = Some(s),
            Some(prev) if prev != s => {
                return Err(ImplicationError::ScopeMismatch(
                    format!("{prev:?}"),
                    format!("{s:?}"),
                ));
            }
            Some(_) => {}
        }
    }
    Ok(scope)
}

/// Builds `premise ==> consequence` candidates from the unverified likely
/// and partial primitives of one `Ensures` scope and inserts the survivors
/// into the pool. Returns the new candidate ids.
pub fn find_implications(
    pool: &mut CandidatePool,
    likely: &[usize],
    partial: &[usize],
    deps: &DependenceRelation,
    index: &SupportIndex,
) -> Result<Vec<usize>, ImplicationError> {
    let ids: Vec<usize> = likely.iter().chain(partial).copied().collect();
    let Some(scope) = shared_scope(pool, &ids)? else {
        return Ok(Vec::new());
    };
    let Scope::Ensures(function) = scope else {
        return Err(ImplicationError::ScopeMismatch(
            format!("{scope:?}"),
            "Ensures".into(),
        ));
    };
    let function = function.clone();

    let mut accepted = Vec::new();
    for &hid in &ids {
        let h = pool.get(hid);
        if !is_primitive(&h.pred) || mentions_post(&h.pred) {
            continue;
        }
        for &tid in &ids {
            if hid == tid {
                continue;
            }
            let t = pool.get(tid);
            if !is_primitive(&t.pred) || !mentions_post(&t.pred) {
                continue;
            }
            let hv = pred_names(&h.pred);
            let tv = pred_names(&t.pred);
            let related = hv
                .iter()
                .any(|a| tv.iter().any(|b| deps.related(&function, a, b)));
            if !related {
                continue;
            }
            if !index.data_justified(h, t) {
                continue;
            }
            accepted.push((h.pred.clone(), t.pred.clone()));
        }
    }

    let mut new_ids = Vec::new();
    for (h, t) in accepted {
        let pred = Predicate::Implies(Box::new(h), Box::new(t));
        if let Some(id) = pool.insert(Scope::Ensures(function.clone()), pred) {
            new_ids.push(id);
        }
    }
    Ok(new_ids)
}

/// Chain members in canonical order: nested chains of the same connective
/// are flattened, members sorted by their printed form, duplicates merged.
fn chain(members: Vec<Predicate>) -> Vec<Predicate> {
    let mut out: Vec<Predicate> = Vec::new();
    let mut seen = BTreeSet::new();
    for m in members {
        if seen.insert(print_pred(&m, false)) {
            out.push(m);
        }
    }
    out.sort_by_key(|p| print_pred(p, false));
    out
}

/// An `&&`-combinable side: a single atom or an existing `&&`-chain.
fn conjuncts(p: &Predicate) -> Option<Vec<Predicate>> {
    match p {
        Predicate::Atom(..) => Some(vec![p.clone()]),
        Predicate::And(ps) if ps.iter().all(is_primitive) => Some(ps.clone()),
        _ => None,
    }
}

fn disjuncts(p: &Predicate) -> Option<Vec<Predicate>> {
    match p {
        Predicate::Atom(..) => Some(vec![p.clone()]),
        Predicate::Or(ps) if ps.iter().all(is_primitive) => Some(ps.clone()),
        _ => None,
    }
}

fn glue(members: Vec<Predicate>, and: bool) -> Predicate {
    let mut members = chain(members);
    if members.len() == 1 {
        members.pop().expect("nonempty chain")
    } else if and {
        Predicate::And(members)
    } else {
        Predicate::Or(members)
    }
}

/// Weakens failed implication candidates of one scope and inserts the new
/// shapes into the pool. Returns the new candidate ids.
pub fn weaken_implications(
    contract: &Contract,
    pool: &mut CandidatePool,
    unverified: &[usize],
    config: &BackendConfig,
) -> Result<Vec<usize>, ImplicationError> {
    let Some(scope) = shared_scope(pool, unverified)?.cloned() else {
        return Ok(Vec::new());
    };

    let parts: Vec<(Predicate, Predicate)> = unverified
        .iter()
        .filter_map(|&id| match &pool.get(id).pred {
            Predicate::Implies(h, t) => Some((h.as_ref().clone(), t.as_ref().clone())),
            _ => None,
        })
        .collect();

    // Conjoined premises first: they commit to nothing about the
    // consequences, which stay as observed. Disjoined consequences are
    // the fallback once no premise pair is left to try.
    let mut out: Vec<(Predicate, Predicate)> = Vec::new();
    for (i, (h1, t1)) in parts.iter().enumerate() {
        for (h2, t2) in &parts[i + 1..] {
            if print_pred(t1, false) != print_pred(t2, false) {
                continue;
            }
            if print_pred(h1, false) == print_pred(h2, false) {
                continue;
            }
            let (Some(c1), Some(c2)) = (conjuncts(h1), conjuncts(h2)) else {
                continue;
            };
            let merged = glue(c1.into_iter().chain(c2).collect(), true);
            if classify_trivial(contract, &scope, &merged, config) == Triviality::Contradiction {
                continue;
            }
            out.push((merged, t1.clone()));
        }
    }
    if out.is_empty() {
        for (i, (h1, t1)) in parts.iter().enumerate() {
            for (h2, t2) in &parts[i + 1..] {
                if print_pred(h1, false) != print_pred(h2, false) {
                    continue;
                }
                if print_pred(t1, false) == print_pred(t2, false) {
                    continue;
                }
                let (Some(d1), Some(d2)) = (disjuncts(t1), disjuncts(t2)) else {
                    continue;
                };
                let merged = glue(d1.into_iter().chain(d2).collect(), false);
                if classify_trivial(contract, &scope, &merged, config) == Triviality::Tautology {
                    continue;
                }
                out.push((h1.clone(), merged));
            }
        }
    }

    let mut new_ids = Vec::new();
    for (h, t) in out {
        let pred = Predicate::Implies(Box::new(h), Box::new(t));
        if let Some(id) = pool.insert(scope.clone(), pred) {
            new_ids.push(id);
        }
    }
    Ok(new_ids)
}
