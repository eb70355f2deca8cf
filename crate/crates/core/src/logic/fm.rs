//! Fourier–Motzkin elimination for conjunctions of linear constraints over
//! integer variables.
//!
//! Every constraint is `expr <= 0` (equalities are substituted away or
//! split). Elimination works over the rationals, with one integer
//! tightening: when a constraint's variable coefficients share a factor,
//! the constant is floored after division, which is exact for integer
//! solutions and shrinks the rational relaxation. Unsatisfiability is
//! therefore conclusive for integers, while satisfiability yields a
//! rational witness that the caller must validate on an integer point.

use super::formula::LinExpr;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FmOutcome {
    /// No integer (indeed no rational) solution.
    Unsat,
    /// A rational point satisfying every constraint.
    Sat(BTreeMap<String, BigRational>),
    /// Elimination exceeded the size budget.
    TooLarge,
}

const MAX_CONSTRAINTS: usize = 20_000;

/// Divide out the gcd of the variable coefficients and floor the constant:
/// `g*ax + k <= 0` becomes `ax + ceil(k/g) <= 0`, exact for integer points.
fn tighten(mut e: LinExpr) -> LinExpr {
    let mut g = BigInt::zero();
    for c in e.coeffs.values() {
        g = g.gcd(c);
    }
    if g.is_zero() || g == BigInt::from(1) {
        return e;
    }
    for c in e.coeffs.values_mut() {
        *c /= &g;
    }
    // k <= 0 scaled: k/g rounded up keeps all integer solutions.
    e.k = e.k.div_ceil(&g);
    e
}

fn is_trivially_true(e: &LinExpr) -> bool {
    e.coeffs.is_empty() && !e.k.is_positive()
}

fn is_trivially_false(e: &LinExpr) -> bool {
    e.coeffs.is_empty() && e.k.is_positive()
}

/// Decide `all(le_zero <= 0) && all(eq_zero == 0)` and extract a rational
/// witness on satisfiability.
pub fn solve(le_zero: Vec<LinExpr>, eq_zero: Vec<LinExpr>) -> FmOutcome {
    let mut ineqs: Vec<LinExpr> = le_zero;
    // (var, definition) stack from equality substitution, applied last
    // during witness reconstruction.
    let mut defs: Vec<(String, LinExpr)> = Vec::new();

    let mut eqs = eq_zero;
    while let Some(eq) = eqs.pop() {
        if eq.coeffs.is_empty() {
            if eq.k.is_zero() {
                continue;
            }
            return FmOutcome::Unsat;
        }
        let unit = eq
            .coeffs
            .iter()
            .find(|(_, c)| c.abs() == BigInt::from(1))
            .map(|(v, c)| (v.clone(), c.clone()));
        match unit {
            Some((v, c)) => {
                // c*v + rest == 0  =>  v = -rest/c; with |c| = 1 the
                // definition stays integral.
                let mut rest = eq.clone();
                rest.coeffs.remove(&v);
                let def = rest.scale(&-c);
                for e in ineqs.iter_mut().chain(eqs.iter_mut()) {
                    substitute(e, &v, &def);
                }
                defs.push((v, def));
            }
            None => {
                // No unit pivot: fall back to a pair of inequalities.
                ineqs.push(eq.clone());
                ineqs.push(eq.neg());
            }
        }
    }

    let mut sys: BTreeSet<LinExpr> = BTreeSet::new();
    for e in ineqs {
        let e = tighten(e);
        if is_trivially_false(&e) {
            return FmOutcome::Unsat;
        }
        if !is_trivially_true(&e) {
            sys.insert(e);
        }
    }

    // (var, lower-bound exprs, upper-bound exprs) in elimination order.
    // In `c*x + rest <= 0`, positive c gives an upper bound, negative a
    // lower bound; the expressions keep their original form.
    let mut trail: Vec<(String, Vec<LinExpr>, Vec<LinExpr>)> = Vec::new();

    while let Some(var) = pick_variable(&sys) {
        let (mut lowers, mut uppers, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for e in std::mem::take(&mut sys) {
            match e.coeffs.get(&var).map(|c| c.sign()) {
                Some(num_bigint::Sign::Plus) => uppers.push(e),
                Some(num_bigint::Sign::Minus) => lowers.push(e),
                _ => rest.push(e),
            }
        }
        if lowers.len() * uppers.len() + rest.len() > MAX_CONSTRAINTS {
            return FmOutcome::TooLarge;
        }
        for up in &uppers {
            let cu = up.coeffs[&var].clone();
            for lo in &lowers {
                let cl = lo.coeffs[&var].clone();
                // Positive combination cancelling `var`.
                let combined = up.clone().scale(&-cl).add(&lo.clone().scale(&cu));
                debug_assert!(!combined.coeffs.contains_key(&var));
                let combined = tighten(combined);
                if is_trivially_false(&combined) {
                    return FmOutcome::Unsat;
                }
                if !is_trivially_true(&combined) {
                    rest.push(combined);
                }
            }
        }
        trail.push((var, lowers, uppers));
        sys = rest.into_iter().collect();
    }

    for e in &sys {
        if is_trivially_false(e) {
            return FmOutcome::Unsat;
        }
    }

    // Witness: walk the trail backwards, picking each variable inside its
    // evaluated bounds, preferring an integer point.
    let mut witness: BTreeMap<String, BigRational> = BTreeMap::new();
    for (var, lowers, uppers) in trail.iter().rev() {
        let lo = lowers
            .iter()
            .map(|e| bound_value(e, var, &witness))
            .max();
        let hi = uppers
            .iter()
            .map(|e| bound_value(e, var, &witness))
            .min();
        let v = match (lo, hi) {
            (None, None) => BigRational::zero(),
            (Some(lo), None) => lo.ceil(),
            (None, Some(hi)) => hi.floor(),
            (Some(lo), Some(hi)) => {
                debug_assert!(lo <= hi, "elimination left an empty interval");
                if lo.ceil() <= hi {
                    lo.ceil()
                } else {
                    (lo + hi) / BigRational::from(BigInt::from(2))
                }
            }
        };
        witness.insert(var.clone(), v);
    }
    for (var, def) in defs.iter().rev() {
        let v = eval_lin(def, &witness);
        witness.insert(var.clone(), v);
    }
    FmOutcome::Sat(witness)
}

/// Replace `var` by `def` in `e`.
fn substitute(e: &mut LinExpr, var: &str, def: &LinExpr) {
    if let Some(c) = e.coeffs.remove(var) {
        let scaled = def.clone().scale(&c);
        *e = std::mem::take(e).add(&scaled);
    }
}

/// The variable whose elimination creates the fewest new constraints.
fn pick_variable(sys: &BTreeSet<LinExpr>) -> Option<String> {
    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for e in sys {
        for (v, c) in &e.coeffs {
            let entry = counts.entry(v).or_default();
            if c.is_positive() {
                entry.0 += 1;
            } else {
                entry.1 += 1;
            }
        }
    }
    counts
        .into_iter()
        .min_by_key(|(_, (p, n))| p * n)
        .map(|(v, _)| v.to_string())
}

/// Value of the bound on `var` implied by `c*var + rest <= 0`, with the
/// other variables read from the witness.
fn bound_value(e: &LinExpr, var: &str, witness: &BTreeMap<String, BigRational>) -> BigRational {
    let c = e.coeffs[var].clone();
    let mut rest = e.clone();
    rest.coeffs.remove(var);
    let r = eval_lin(&rest, witness);
    // var <= -rest/c (c > 0) or var >= -rest/c (c < 0); both are -rest/c.
    -r / BigRational::from(c)
}

fn eval_lin(e: &LinExpr, witness: &BTreeMap<String, BigRational>) -> BigRational {
    let mut acc = BigRational::from(e.k.clone());
    for (v, c) in &e.coeffs {
        let val = witness.get(v).cloned().unwrap_or_else(BigRational::zero);
        acc += val * BigRational::from(c.clone());
    }
    acc
}
