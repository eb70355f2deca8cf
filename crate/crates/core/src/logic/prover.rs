//! Builtin validity checker.
//!
//! Strategy: negate the obligation under the assumptions, then search for a
//! satisfying assignment. Address variables are case-split into one
//! representative assignment per equality pattern, which resolves mapping
//! reads into plain integer cells. Bool variables are enumerated. What
//! remains is pure integer arithmetic, put into disjunctive normal form and
//! decided per disjunct by Fourier–Motzkin.
//!
//! Rational witnesses are re-validated on a concrete integer model against
//! the original formula before reporting a refutation; when no rounding
//! validates, the result degrades to unknown rather than claiming either
//! side.

use super::backend::{BackendConfig, ProofResult, VerificationQuery};
use super::fm::{self, FmOutcome};
use super::formula::{
    cell_name, linearize, CVal, Evaluator, Formula, LinExpr, MapTerm, Model, NonLinear, Sort,
    Term,
};
use super::partition::address_assignments;
use crate::spec::CmpOp;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use std::collections::{BTreeMap, BTreeSet};

const MAX_DISJUNCTS: usize = 4096;
const MAX_BOOL_VARS: u32 = 12;

pub fn prove(query: &VerificationQuery, config: &BackendConfig) -> ProofResult {
    let negated = query.negation();
    if negated == Formula::False {
        return ProofResult::Proved;
    }

    let (addr_vars, literals) = address_symbols(&negated, &query.vars);
    let assignments = address_assignments(&addr_vars, &literals, config.k_addresses);

    // The first undecidable sub-case is remembered; a concrete refutation
    // anywhere still wins.
    let mut undecided: Option<String> = None;
    let note = |reason: String, undecided: &mut Option<String>| {
        undecided.get_or_insert(reason);
    };

    for assign in &assignments {
        let mut cells: BTreeMap<String, Sort> = BTreeMap::new();
        let grounded = match ground(&negated, assign, query, &mut cells) {
            Ok(f) => f,
            Err(reason) => {
                note(reason, &mut undecided);
                continue;
            }
        };

        let mut sorts = query.vars.clone();
        sorts.extend(cells);
        let grounded = match lower_bool_comparisons(grounded, &sorts) {
            Ok(f) => f,
            Err(reason) => {
                note(reason, &mut undecided);
                continue;
            }
        };

        let bools = bool_variables(&grounded, &sorts);
        if bools.len() as u32 > MAX_BOOL_VARS {
            note(format!("{} bool variables to enumerate", bools.len()), &mut undecided);
            continue;
        }

        for mask in 0..(1u64 << bools.len()) {
            let bool_assign: BTreeMap<String, bool> = bools
                .iter()
                .enumerate()
                .map(|(i, b)| (b.clone(), mask >> i & 1 == 1))
                .collect();
            let f = assign_bools(&grounded, &bool_assign);
            let disjuncts = match dnf(&f, false) {
                Ok(d) => d,
                Err(reason) => {
                    note(reason, &mut undecided);
                    continue;
                }
            };
            for conj in disjuncts {
                match fm::solve(conj.les, conj.eqs) {
                    FmOutcome::Unsat => {}
                    FmOutcome::TooLarge => {
                        note("linear system exceeded the elimination budget".into(), &mut undecided)
                    }
                    FmOutcome::Sat(witness) => {
                        match validate(query, &negated, assign, &bool_assign, &witness) {
                            Some(model) => return ProofResult::Refuted(Some(model)),
                            None => note(
                                "rational counterexample failed integer validation".into(),
                                &mut undecided,
                            ),
                        }
                    }
                }
            }
        }
    }

    match undecided {
        Some(reason) => ProofResult::Unknown(reason),
        None => ProofResult::Proved,
    }
}

/// Address variables used by the formula and address literals it mentions.
pub(crate) fn address_symbols(f: &Formula, vars: &BTreeMap<String, Sort>) -> (Vec<String>, Vec<u32>) {
    let mut names: BTreeSet<String> = BTreeSet::new();
    let mut lits: BTreeSet<u32> = BTreeSet::new();
    visit_terms(f, &mut |t| match t {
        Term::Var(n) if vars.get(n) == Some(&Sort::Addr) => {
            names.insert(n.clone());
        }
        Term::Addr(k) => {
            lits.insert(*k);
        }
        _ => {}
    });
    (names.into_iter().collect(), lits.into_iter().collect())
}

pub(crate) fn visit_terms(f: &Formula, visit: &mut impl FnMut(&Term)) {
    match f {
        Formula::True | Formula::False => {}
        Formula::Cmp(_, a, b) => {
            visit_term(a, visit);
            visit_term(b, visit);
        }
        Formula::Holds(t) => visit_term(t, visit),
        Formula::Not(g) => visit_terms(g, visit),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| visit_terms(g, visit)),
        Formula::Implies(a, b) => {
            visit_terms(a, visit);
            visit_terms(b, visit);
        }
    }
}

fn visit_term(t: &Term, visit: &mut impl FnMut(&Term)) {
    visit(t);
    match t {
        Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => {
            visit_term(a, visit);
            visit_term(b, visit);
        }
        Term::Select(m, keys) => {
            visit_map(m, visit);
            keys.iter().for_each(|k| visit_term(k, visit));
        }
        _ => {}
    }
}

fn visit_map(m: &MapTerm, visit: &mut impl FnMut(&Term)) {
    if let MapTerm::Store(inner, keys, val) = m {
        visit_map(inner, visit);
        keys.iter().for_each(|k| visit_term(k, visit));
        visit_term(val, visit);
    }
}

/// Substitute the concrete address assignment, fold address comparisons,
/// and resolve every mapping read to a named integer/bool cell.
pub(crate) fn ground(
    f: &Formula,
    assign: &BTreeMap<String, u32>,
    query: &VerificationQuery,
    cells: &mut BTreeMap<String, Sort>,
) -> Result<Formula, String> {
    Ok(match f {
        Formula::True => Formula::True,
        Formula::False => Formula::False,
        Formula::Cmp(op, a, b) => {
            let a = ground_term(a, assign, query, cells)?;
            let b = ground_term(b, assign, query, cells)?;
            match (concrete_addr(&a), concrete_addr(&b)) {
                (Some(x), Some(y)) => match op {
                    CmpOp::Eq => (x == y).into_formula(),
                    CmpOp::Ne => (x != y).into_formula(),
                    _ => return Err("ordering comparison on addresses".into()),
                },
                _ => {
                    if is_addr_sorted(&a, query, cells) || is_addr_sorted(&b, query, cells) {
                        return Err("address-valued mapping read survives grounding".into());
                    }
                    Formula::Cmp(*op, a, b)
                }
            }
        }
        Formula::Holds(t) => {
            let t = ground_term(t, assign, query, cells)?;
            match t {
                Term::Bool(b) => b.into_formula(),
                t => Formula::Holds(t),
            }
        }
        Formula::Not(g) => Formula::not(ground(g, assign, query, cells)?),
        Formula::And(gs) => Formula::and(
            gs.iter().map(|g| ground(g, assign, query, cells)).collect::<Result<_, _>>()?,
        ),
        Formula::Or(gs) => Formula::or(
            gs.iter().map(|g| ground(g, assign, query, cells)).collect::<Result<_, _>>()?,
        ),
        Formula::Implies(a, b) => Formula::implies(
            ground(a, assign, query, cells)?,
            ground(b, assign, query, cells)?,
        ),
    })
}

trait IntoFormula {
    fn into_formula(self) -> Formula;
}

impl IntoFormula for bool {
    fn into_formula(self) -> Formula {
        if self {
            Formula::True
        } else {
            Formula::False
        }
    }
}

fn concrete_addr(t: &Term) -> Option<u32> {
    match t {
        Term::Addr(k) => Some(*k),
        _ => None,
    }
}

fn is_addr_sorted(
    t: &Term,
    query: &VerificationQuery,
    cells: &BTreeMap<String, Sort>,
) -> bool {
    match t {
        Term::Addr(_) => true,
        Term::Var(n) => {
            query.vars.get(n) == Some(&Sort::Addr) || cells.get(n) == Some(&Sort::Addr)
        }
        _ => false,
    }
}

fn ground_term(
    t: &Term,
    assign: &BTreeMap<String, u32>,
    query: &VerificationQuery,
    cells: &mut BTreeMap<String, Sort>,
) -> Result<Term, String> {
    Ok(match t {
        Term::Var(n) if query.vars.get(n) == Some(&Sort::Addr) => {
            let k = assign
                .get(n)
                .copied()
                .ok_or_else(|| format!("address variable {n} missing from assignment"))?;
            Term::Addr(k)
        }
        Term::Int(_) | Term::Addr(_) | Term::Bool(_) | Term::Var(_) => t.clone(),
        Term::Add(a, b) => Term::add(
            ground_term(a, assign, query, cells)?,
            ground_term(b, assign, query, cells)?,
        ),
        Term::Sub(a, b) => Term::sub(
            ground_term(a, assign, query, cells)?,
            ground_term(b, assign, query, cells)?,
        ),
        Term::Mul(a, b) => Term::mul(
            ground_term(a, assign, query, cells)?,
            ground_term(b, assign, query, cells)?,
        ),
        Term::Select(m, keys) => {
            let keys = keys
                .iter()
                .map(|k| ground_term(k, assign, query, cells))
                .collect::<Result<Vec<_>, _>>()?;
            resolve_select(m, &keys, assign, query, cells)?
        }
    })
}

fn key_value(t: &Term) -> Option<CVal> {
    match t {
        Term::Int(n) => Some(CVal::Int(n.clone())),
        Term::Addr(k) => Some(CVal::Addr(*k)),
        Term::Bool(b) => Some(CVal::Bool(*b)),
        _ => None,
    }
}

/// Componentwise key comparison: `Some(eq)` when decidable, `None` when a
/// symbolic component blocks the decision.
fn keys_equal(a: &[Term], b: &[Term]) -> Option<bool> {
    debug_assert_eq!(a.len(), b.len(), "mapping key arity mismatch");
    let mut all_eq = true;
    for (x, y) in a.iter().zip(b) {
        match (key_value(x), key_value(y)) {
            (Some(vx), Some(vy)) => {
                if vx != vy {
                    return Some(false);
                }
            }
            _ => {
                if x == y {
                    continue;
                }
                all_eq = false;
            }
        }
    }
    if all_eq {
        Some(true)
    } else {
        None
    }
}

fn resolve_select(
    m: &MapTerm,
    keys: &[Term],
    assign: &BTreeMap<String, u32>,
    query: &VerificationQuery,
    cells: &mut BTreeMap<String, Sort>,
) -> Result<Term, String> {
    match m {
        MapTerm::Store(inner, skeys, val) => {
            let skeys = skeys
                .iter()
                .map(|k| ground_term(k, assign, query, cells))
                .collect::<Result<Vec<_>, _>>()?;
            match keys_equal(&skeys, keys) {
                Some(true) => ground_term(val, assign, query, cells),
                Some(false) => resolve_select(inner, keys, assign, query, cells),
                None => Err("mapping key is symbolic after address grounding".into()),
            }
        }
        MapTerm::Base(name) => {
            let vals: Option<Vec<CVal>> = keys.iter().map(key_value).collect();
            let Some(vals) = vals else {
                return Err("mapping key is symbolic after address grounding".into());
            };
            let cell = cell_name(name, &vals);
            let sort = query.maps.get(name).copied().unwrap_or(Sort::Int);
            cells.insert(cell.clone(), sort);
            Ok(Term::Var(cell))
        }
    }
}

/// Rewrite equality over bool-sorted terms into propositional structure so
/// only `Holds` atoms remain on bools.
pub(crate) fn lower_bool_comparisons(
    f: Formula,
    sorts: &BTreeMap<String, Sort>,
) -> Result<Formula, String> {
    let is_bool = |t: &Term| -> bool {
        match t {
            Term::Bool(_) => true,
            Term::Var(n) => sorts.get(n) == Some(&Sort::Bool),
            _ => false,
        }
    };
    Ok(match f {
        Formula::Cmp(op, a, b) if is_bool(&a) || is_bool(&b) => {
            if !(is_bool(&a) && is_bool(&b)) {
                return Err("bool compared with non-bool".into());
            }
            let (ha, hb) = (Formula::Holds(a), Formula::Holds(b));
            let iff = Formula::or(vec![
                Formula::and(vec![ha.clone(), hb.clone()]),
                Formula::and(vec![Formula::not(ha), Formula::not(hb)]),
            ]);
            match op {
                CmpOp::Eq => iff,
                CmpOp::Ne => Formula::not(iff),
                _ => return Err("ordering comparison on bools".into()),
            }
        }
        Formula::Holds(Term::Bool(b)) => b.into_formula(),
        Formula::Not(g) => Formula::not(lower_bool_comparisons(*g, sorts)?),
        Formula::And(gs) => Formula::and(
            gs.into_iter().map(|g| lower_bool_comparisons(g, sorts)).collect::<Result<_, _>>()?,
        ),
        Formula::Or(gs) => Formula::or(
            gs.into_iter().map(|g| lower_bool_comparisons(g, sorts)).collect::<Result<_, _>>()?,
        ),
        Formula::Implies(a, b) => Formula::implies(
            lower_bool_comparisons(*a, sorts)?,
            lower_bool_comparisons(*b, sorts)?,
        ),
        other => other,
    })
}

fn bool_variables(f: &Formula, sorts: &BTreeMap<String, Sort>) -> Vec<String> {
    let mut out = BTreeSet::new();
    visit_terms(f, &mut |t| {
        if let Term::Var(n) = t {
            if sorts.get(n) == Some(&Sort::Bool) {
                out.insert(n.clone());
            }
        }
    });
    out.into_iter().collect()
}

fn assign_bools(f: &Formula, assign: &BTreeMap<String, bool>) -> Formula {
    match f {
        Formula::Holds(Term::Var(n)) => match assign.get(n) {
            Some(b) => (*b).into_formula(),
            None => f.clone(),
        },
        Formula::Not(g) => Formula::not(assign_bools(g, assign)),
        Formula::And(gs) => Formula::and(gs.iter().map(|g| assign_bools(g, assign)).collect()),
        Formula::Or(gs) => Formula::or(gs.iter().map(|g| assign_bools(g, assign)).collect()),
        Formula::Implies(a, b) => {
            Formula::implies(assign_bools(a, assign), assign_bools(b, assign))
        }
        other => other.clone(),
    }
}

/// A conjunction of linear constraints: `les` are `expr <= 0`, `eqs` are
/// `expr == 0`.
#[derive(Debug, Clone, Default)]
pub(crate) struct Conj {
    pub les: Vec<LinExpr>,
    pub eqs: Vec<LinExpr>,
}

/// Disjunctive normal form over linear atoms. `neg` tracks polarity.
pub(crate) fn dnf(f: &Formula, neg: bool) -> Result<Vec<Conj>, String> {
    Ok(match f {
        Formula::True => {
            if neg {
                vec![]
            } else {
                vec![Conj::default()]
            }
        }
        Formula::False => {
            if neg {
                vec![Conj::default()]
            } else {
                vec![]
            }
        }
        Formula::Cmp(op, a, b) => {
            let op = if neg { op.negated() } else { *op };
            let la = linearize(a).map_err(describe_nonlinear)?;
            let lb = linearize(b).map_err(describe_nonlinear)?;
            let diff = la.add(&lb.neg());
            let one = LinExpr::constant(BigInt::one());
            match op {
                CmpOp::Le => vec![conj_le(diff)],
                CmpOp::Lt => vec![conj_le(diff.add(&one))],
                CmpOp::Ge => vec![conj_le(diff.neg())],
                CmpOp::Gt => vec![conj_le(diff.neg().add(&one))],
                CmpOp::Eq => vec![Conj { les: vec![], eqs: vec![diff] }],
                CmpOp::Ne => vec![
                    conj_le(diff.clone().add(&one)),
                    conj_le(diff.neg().add(&one)),
                ],
            }
        }
        Formula::Holds(_) => return Err("unexpected bool atom in arithmetic core".into()),
        Formula::Not(g) => dnf(g, !neg)?,
        Formula::And(gs) => {
            if neg {
                // De Morgan: union of the negated parts.
                let mut out = Vec::new();
                for g in gs {
                    out.extend(dnf(g, true)?);
                }
                out
            } else {
                cross(gs.iter().map(|g| dnf(g, false)).collect::<Result<Vec<_>, _>>()?)?
            }
        }
        Formula::Or(gs) => {
            if neg {
                cross(gs.iter().map(|g| dnf(g, true)).collect::<Result<Vec<_>, _>>()?)?
            } else {
                let mut out = Vec::new();
                for g in gs {
                    out.extend(dnf(g, false)?);
                }
                out
            }
        }
        Formula::Implies(a, b) => {
            if neg {
                cross(vec![dnf(a, false)?, dnf(b, true)?])?
            } else {
                let mut out = dnf(a, true)?;
                out.extend(dnf(b, false)?);
                out
            }
        }
    })
}

fn describe_nonlinear(e: NonLinear) -> String {
    match e {
        NonLinear::Product => "nonlinear arithmetic (product of variables)".into(),
        NonLinear::UnresolvedSelect => "mapping read survives grounding".into(),
        NonLinear::NonIntOperand => "non-integer operand in arithmetic".into(),
    }
}

fn conj_le(e: LinExpr) -> Conj {
    Conj { les: vec![e], eqs: vec![] }
}

fn cross(parts: Vec<Vec<Conj>>) -> Result<Vec<Conj>, String> {
    let mut acc = vec![Conj::default()];
    for part in parts {
        let mut next = Vec::with_capacity(acc.len() * part.len().max(1));
        for left in &acc {
            for right in &part {
                let mut merged = left.clone();
                merged.les.extend(right.les.iter().cloned());
                merged.eqs.extend(right.eqs.iter().cloned());
                next.push(merged);
            }
        }
        if next.len() > MAX_DISJUNCTS {
            return Err("disjunctive normal form exceeded the size budget".into());
        }
        acc = next;
    }
    Ok(acc)
}

/// Round the rational witness and re-check the original (unground)
/// formula on the resulting concrete model.
fn validate(
    query: &VerificationQuery,
    negated: &Formula,
    assign: &BTreeMap<String, u32>,
    bools: &BTreeMap<String, bool>,
    witness: &BTreeMap<String, BigRational>,
) -> Option<Model> {
    #[derive(Clone, Copy)]
    enum Rounding {
        Floor,
        Ceil,
        Nearest,
    }
    for mode in [Rounding::Nearest, Rounding::Floor, Rounding::Ceil] {
        let mut model = Model::default();
        for (v, k) in assign {
            model.set(v.clone(), CVal::Addr(*k));
        }
        for (v, b) in bools {
            model.set(v.clone(), CVal::Bool(*b));
        }
        for (v, r) in witness {
            let n = match mode {
                Rounding::Floor => r.floor().to_integer(),
                Rounding::Ceil => r.ceil().to_integer(),
                Rounding::Nearest => r.round().to_integer(),
            };
            model.set(v.clone(), CVal::Int(n));
        }
        let mut ev = Evaluator {
            model,
            on_missing: Box::new(|_, sort| match sort {
                Sort::Int => CVal::Int(BigInt::from(0)),
                Sort::Addr => CVal::Addr(0),
                Sort::Bool => CVal::Bool(false),
            }),
            vars: &query.vars,
            maps: &query.maps,
        };
        if ev.formula(negated) {
            return Some(ev.model);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::backend::ObligationSource;

    fn query(
        vars: &[(&str, Sort)],
        assumptions: Vec<Formula>,
        obligation: Formula,
    ) -> VerificationQuery {
        VerificationQuery {
            function: "f".into(),
            path: "p0".into(),
            vars: vars.iter().map(|(n, s)| (n.to_string(), *s)).collect(),
            maps: BTreeMap::from([("bal".to_string(), Sort::Int)]),
            assumptions,
            obligation,
            source: ObligationSource::Candidate(0),
            blocked: None,
        }
    }

    fn cfg() -> BackendConfig {
        BackendConfig { width: 16, ..BackendConfig::default() }
    }

    #[test]
    fn proves_linear_consequence() {
        // x >= 1 && y == x + 2  =>  y >= 3.
        let q = query(
            &[("x", Sort::Int), ("y", Sort::Int)],
            vec![
                Formula::cmp(CmpOp::Ge, Term::var("x"), Term::int(1)),
                Formula::cmp(CmpOp::Eq, Term::var("y"), Term::add(Term::var("x"), Term::int(2))),
            ],
            Formula::cmp(CmpOp::Ge, Term::var("y"), Term::int(3)),
        );
        assert_eq!(prove(&q, &cfg()), ProofResult::Proved);
    }

    #[test]
    fn refutes_with_validated_model() {
        // x >= 0 does not imply x >= 1; expect a model with x == 0.
        let q = query(
            &[("x", Sort::Int)],
            vec![Formula::cmp(CmpOp::Ge, Term::var("x"), Term::int(0))],
            Formula::cmp(CmpOp::Ge, Term::var("x"), Term::int(1)),
        );
        let ProofResult::Refuted(Some(m)) = prove(&q, &cfg()) else {
            panic!("expected refutation with model");
        };
        assert_eq!(m.get("x"), Some(&CVal::Int(0.into())));
    }

    #[test]
    fn case_splits_addresses_for_aliasing() {
        // bal[to] == bal[from] + 1 is consistent when from != to but
        // contradictory when they alias; the obligation from == to must
        // therefore be refutable with a model where they differ.
        let sel = |v: &str| {
            Term::Select(MapTerm::Base("bal".into()), vec![Term::var(v)])
        };
        let q = VerificationQuery {
            function: "f".into(),
            path: "p0".into(),
            vars: BTreeMap::from([
                ("from".to_string(), Sort::Addr),
                ("to".to_string(), Sort::Addr),
            ]),
            maps: BTreeMap::from([("bal".to_string(), Sort::Int)]),
            assumptions: vec![Formula::cmp(
                CmpOp::Eq,
                sel("to"),
                Term::add(sel("from"), Term::int(1)),
            )],
            obligation: Formula::cmp(CmpOp::Eq, Term::var("from"), Term::var("to")),
            source: ObligationSource::Candidate(0),
            blocked: None,
        };
        let ProofResult::Refuted(Some(m)) = prove(&q, &cfg()) else {
            panic!("expected refutation");
        };
        assert_ne!(m.get("from"), m.get("to"));

        // The aliased split contradicts the assumption (a cell would equal
        // itself plus one), so from != to holds on every consistent split.
        let q2 = VerificationQuery {
            obligation: Formula::cmp(CmpOp::Ne, Term::var("from"), Term::var("to")),
            ..q
        };
        assert_eq!(prove(&q2, &cfg()), ProofResult::Proved);
    }

    #[test]
    fn store_chains_resolve_per_assignment() {
        // post = store(bal, to, select(bal, to) + amt): proving
        // select(post, to) == select(bal, to) + amt holds for all aliasing.
        let bal = MapTerm::Base("bal".into());
        let read_to = Term::Select(bal.clone(), vec![Term::var("to")]);
        let post = MapTerm::Store(
            Box::new(bal.clone()),
            vec![Term::var("to")],
            Box::new(Term::add(read_to.clone(), Term::var("amt"))),
        );
        let q = VerificationQuery {
            function: "f".into(),
            path: "p0".into(),
            vars: BTreeMap::from([
                ("to".to_string(), Sort::Addr),
                ("amt".to_string(), Sort::Int),
            ]),
            maps: BTreeMap::from([("bal".to_string(), Sort::Int)]),
            assumptions: vec![],
            obligation: Formula::cmp(
                CmpOp::Eq,
                Term::Select(post, vec![Term::var("to")]),
                Term::add(read_to, Term::var("amt")),
            ),
            source: ObligationSource::Candidate(0),
            blocked: None,
        };
        assert_eq!(prove(&q, &cfg()), ProofResult::Proved);
    }

    #[test]
    fn nonlinear_products_are_unknown() {
        let q = query(
            &[("x", Sort::Int), ("y", Sort::Int)],
            vec![],
            Formula::cmp(
                CmpOp::Ge,
                Term::mul(Term::var("x"), Term::var("x")),
                Term::int(0),
            ),
        );
        let ProofResult::Unknown(reason) = prove(&q, &cfg()) else {
            panic!("expected unknown");
        };
        assert!(reason.contains("nonlinear"), "reason: {reason}");
    }

    #[test]
    fn bool_variables_are_enumerated() {
        // (flag => x >= 5) && (!flag => x >= 5)  =>  x >= 5.
        let q = VerificationQuery {
            function: "f".into(),
            path: "p0".into(),
            vars: BTreeMap::from([
                ("flag".to_string(), Sort::Bool),
                ("x".to_string(), Sort::Int),
            ]),
            maps: BTreeMap::new(),
            assumptions: vec![
                Formula::implies(
                    Formula::Holds(Term::var("flag")),
                    Formula::cmp(CmpOp::Ge, Term::var("x"), Term::int(5)),
                ),
                Formula::implies(
                    Formula::not(Formula::Holds(Term::var("flag"))),
                    Formula::cmp(CmpOp::Ge, Term::var("x"), Term::int(5)),
                ),
            ],
            obligation: Formula::cmp(CmpOp::Ge, Term::var("x"), Term::int(5)),
            source: ObligationSource::Candidate(0),
            blocked: None,
        };
        assert_eq!(prove(&q, &cfg()), ProofResult::Proved);

        // Dropping one arm makes it refutable with flag == false.
        let q2 = VerificationQuery {
            assumptions: vec![Formula::implies(
                Formula::Holds(Term::var("flag")),
                Formula::cmp(CmpOp::Ge, Term::var("x"), Term::int(5)),
            )],
            ..q
        };
        let ProofResult::Refuted(Some(m)) = prove(&q2, &cfg()) else {
            panic!("expected refutation");
        };
        assert_eq!(m.get("flag"), Some(&CVal::Bool(false)));
    }

    #[test]
    fn validation_rejects_purely_rational_artifacts() {
        // 2x == 1 has no integer solution: assuming it, anything is
        // provable; the negated system is rational-sat (x = 1/2) but must
        // not be reported as a refutation.
        let q = query(
            &[("x", Sort::Int)],
            vec![Formula::cmp(
                CmpOp::Eq,
                Term::mul(Term::int(2), Term::var("x")),
                Term::int(1),
            )],
            Formula::False,
        );
        // Integer tightening inside the solver already closes this one.
        assert_eq!(prove(&q, &cfg()), ProofResult::Proved);
    }
}
