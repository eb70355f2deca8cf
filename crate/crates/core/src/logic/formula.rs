//! Logical formulas produced by verification-condition generation and
//! consumed by the proof backends.
//!
//! Terms are integer arithmetic over symbolic variables, address and bool
//! atoms, and reads from mapping store chains. Machine-width bounds are not
//! implicit: generators must state range assumptions explicitly, so the
//! backends work over unbounded integers.

use crate::spec::CmpOp;
use num_bigint::BigInt;
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Int,
    Addr,
    Bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Int(BigInt),
    Addr(u32),
    Bool(bool),
    /// Symbolic variable; its sort lives in the query's variable table.
    Var(String),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
    /// Read of a mapping at a key vector (one entry per nesting level).
    Select(MapTerm, Vec<Term>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MapTerm {
    /// A mapping's symbolic initial contents, named by the generator.
    Base(String),
    Store(Box<MapTerm>, Vec<Term>, Box<Term>),
}

impl MapTerm {
    pub fn base_name(&self) -> &str {
        match self {
            MapTerm::Base(n) => n,
            MapTerm::Store(m, ..) => m.base_name(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Cmp(CmpOp, Term, Term),
    /// A bool-sorted term used as an atom.
    Holds(Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

// Constructor names mirror the operations they build.
#[allow(clippy::should_implement_trait)]
impl Term {
    pub fn int(n: impl Into<BigInt>) -> Term {
        Term::Int(n.into())
    }

    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn add(a: Term, b: Term) -> Term {
        match (a, b) {
            (Term::Int(a), Term::Int(b)) => Term::Int(a + b),
            (a, b) => Term::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Term, b: Term) -> Term {
        match (a, b) {
            (Term::Int(a), Term::Int(b)) => Term::Int(a - b),
            (a, b) => Term::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Term, b: Term) -> Term {
        match (a, b) {
            (Term::Int(a), Term::Int(b)) => Term::Int(a * b),
            (a, b) => Term::Mul(Box::new(a), Box::new(b)),
        }
    }
}

// Constructor names mirror the operations they build.
#[allow(clippy::should_implement_trait)]
impl Formula {
    pub fn and(mut fs: Vec<Formula>) -> Formula {
        fs.retain(|f| *f != Formula::True);
        if fs.contains(&Formula::False) {
            return Formula::False;
        }
        match fs.len() {
            0 => Formula::True,
            1 => fs.pop().unwrap(),
            _ => Formula::And(fs),
        }
    }

    pub fn or(mut fs: Vec<Formula>) -> Formula {
        fs.retain(|f| *f != Formula::False);
        if fs.contains(&Formula::True) {
            return Formula::True;
        }
        match fs.len() {
            0 => Formula::False,
            1 => fs.pop().unwrap(),
            _ => Formula::Or(fs),
        }
    }

    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(inner) => *inner,
            other => Formula::Not(Box::new(other)),
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        match (a, b) {
            (Formula::True, b) => b,
            (Formula::False, _) => Formula::True,
            (_, Formula::True) => Formula::True,
            (a, Formula::False) => Formula::not(a),
            (a, b) => Formula::Implies(Box::new(a), Box::new(b)),
        }
    }

    pub fn cmp(op: CmpOp, a: Term, b: Term) -> Formula {
        Formula::Cmp(op, a, b)
    }
}

/// Invents a value for a symbol the model does not bind yet.
pub type OnMissing<'a> = Box<dyn FnMut(&str, Sort) -> CVal + 'a>;

/// Concrete value during formula evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CVal {
    Int(BigInt),
    Addr(u32),
    Bool(bool),
}

impl fmt::Display for CVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CVal::Int(n) => write!(f, "{n}"),
            CVal::Addr(k) => write!(f, "a{k}"),
            CVal::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// A (partial) assignment of symbolic variables and mapping cells to
/// concrete values. Mapping cells are named by `cell_name` once their keys
/// are concrete.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Model {
    pub values: BTreeMap<String, CVal>,
}

impl Model {
    pub fn set(&mut self, name: impl Into<String>, v: CVal) {
        self.values.insert(name.into(), v);
    }

    pub fn get(&self, name: &str) -> Option<&CVal> {
        self.values.get(name)
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, v) in &self.values {
            if !first {
                write!(f, ", ")?;
            }
            write!(f, "{k} = {v}")?;
            first = false;
        }
        Ok(())
    }
}

/// Canonical name for the cell of `base` at concrete keys.
pub fn cell_name(base: &str, keys: &[CVal]) -> String {
    use fmt::Write;
    let mut s = String::from(base);
    for k in keys {
        write!(s, "[{k}]").expect("writing to string");
    }
    s
}

/// Evaluates formulas under a model, resolving store chains with concrete
/// keys. Variables and cells missing from the model are produced by
/// `on_missing` (and recorded), letting a falsifier invent values lazily
/// while a validator supplies strict defaults.
pub struct Evaluator<'a> {
    pub model: Model,
    pub on_missing: OnMissing<'a>,
    pub vars: &'a BTreeMap<String, Sort>,
    /// Value sort of each mapping, by base name.
    pub maps: &'a BTreeMap<String, Sort>,
}

impl<'a> Evaluator<'a> {
    fn lookup(&mut self, name: &str, sort: Sort) -> CVal {
        if let Some(v) = self.model.get(name) {
            return v.clone();
        }
        let v = (self.on_missing)(name, sort);
        self.model.set(name, v.clone());
        v
    }

    pub fn term(&mut self, t: &Term) -> CVal {
        match t {
            Term::Int(n) => CVal::Int(n.clone()),
            Term::Addr(k) => CVal::Addr(*k),
            Term::Bool(b) => CVal::Bool(*b),
            Term::Var(name) => {
                let sort = self.vars.get(name).copied().unwrap_or(Sort::Int);
                self.lookup(name, sort)
            }
            Term::Add(a, b) => CVal::Int(self.int(a) + self.int(b)),
            Term::Sub(a, b) => CVal::Int(self.int(a) - self.int(b)),
            Term::Mul(a, b) => CVal::Int(self.int(a) * self.int(b)),
            Term::Select(map, keys) => {
                let keys: Vec<CVal> = keys.iter().map(|k| self.term(k)).collect();
                self.select(map, &keys)
            }
        }
    }

    fn select(&mut self, map: &MapTerm, keys: &[CVal]) -> CVal {
        match map {
            MapTerm::Base(name) => {
                let sort = self.maps.get(name).copied().unwrap_or(Sort::Int);
                let cell = cell_name(name, keys);
                self.lookup(&cell, sort)
            }
            MapTerm::Store(inner, skeys, val) => {
                let skeys: Vec<CVal> = skeys.iter().map(|k| self.term(k)).collect();
                if skeys == keys {
                    self.term(val)
                } else {
                    self.select(inner, keys)
                }
            }
        }
    }

    fn int(&mut self, t: &Term) -> BigInt {
        match self.term(t) {
            CVal::Int(n) => n,
            v => panic!("arithmetic on non-integer value {v:?}"),
        }
    }

    pub fn formula(&mut self, f: &Formula) -> bool {
        match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Cmp(op, a, b) => {
                let (a, b) = (self.term(a), self.term(b));
                match (a, b) {
                    (CVal::Int(a), CVal::Int(b)) => match op {
                        CmpOp::Eq => a == b,
                        CmpOp::Ne => a != b,
                        CmpOp::Lt => a < b,
                        CmpOp::Gt => a > b,
                        CmpOp::Le => a <= b,
                        CmpOp::Ge => a >= b,
                    },
                    (a, b) => match op {
                        CmpOp::Eq => a == b,
                        CmpOp::Ne => a != b,
                        _ => panic!("ordering on non-integer values"),
                    },
                }
            }
            Formula::Holds(t) => match self.term(t) {
                CVal::Bool(b) => b,
                v => panic!("non-bool atom value {v:?}"),
            },
            Formula::Not(f) => !self.formula(f),
            Formula::And(fs) => fs.iter().all(|f| self.formula(f)),
            Formula::Or(fs) => fs.iter().any(|f| self.formula(f)),
            Formula::Implies(a, b) => !self.formula(a) || self.formula(b),
        }
    }
}

/// Linear form `sum(coeffs[v] * v) + k` with integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct LinExpr {
    pub coeffs: BTreeMap<String, BigInt>,
    pub k: BigInt,
}

/// The term is not a linear integer combination (a product of two
/// symbolic factors, or an unresolved mapping read).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NonLinear {
    Product,
    UnresolvedSelect,
    NonIntOperand,
}

// Constructor names mirror the operations they build.
#[allow(clippy::should_implement_trait)]
impl LinExpr {
    pub fn constant(k: impl Into<BigInt>) -> LinExpr {
        LinExpr { coeffs: BTreeMap::new(), k: k.into() }
    }

    pub fn variable(name: &str) -> LinExpr {
        LinExpr {
            coeffs: BTreeMap::from([(name.to_string(), BigInt::from(1))]),
            k: BigInt::zero(),
        }
    }

    pub fn add(mut self, other: &LinExpr) -> LinExpr {
        for (v, c) in &other.coeffs {
            let e = self.coeffs.entry(v.clone()).or_default();
            *e += c;
            if e.is_zero() {
                self.coeffs.remove(v);
            }
        }
        self.k += &other.k;
        self
    }

    pub fn scale(mut self, c: &BigInt) -> LinExpr {
        if c.is_zero() {
            return LinExpr::constant(0);
        }
        for coeff in self.coeffs.values_mut() {
            *coeff *= c;
        }
        self.k *= c;
        self
    }

    pub fn neg(self) -> LinExpr {
        self.scale(&BigInt::from(-1))
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// Lower a ground integer term (selects already resolved, addresses and
/// bools eliminated) into a linear expression.
pub fn linearize(t: &Term) -> Result<LinExpr, NonLinear> {
    match t {
        Term::Int(n) => Ok(LinExpr::constant(n.clone())),
        Term::Var(v) => Ok(LinExpr::variable(v)),
        Term::Add(a, b) => Ok(linearize(a)?.add(&linearize(b)?)),
        Term::Sub(a, b) => Ok(linearize(a)?.add(&linearize(b)?.neg())),
        Term::Mul(a, b) => {
            let (la, lb) = (linearize(a)?, linearize(b)?);
            if la.is_constant() {
                Ok(lb.scale(&la.k))
            } else if lb.is_constant() {
                Ok(la.scale(&lb.k))
            } else {
                Err(NonLinear::Product)
            }
        }
        Term::Select(..) => Err(NonLinear::UnresolvedSelect),
        Term::Addr(_) | Term::Bool(_) => Err(NonLinear::NonIntOperand),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_missing() -> Box<dyn FnMut(&str, Sort) -> CVal> {
        Box::new(|name, _| panic!("unexpected missing variable {name}"))
    }

    #[test]
    fn evaluates_arithmetic_and_connectives() {
        let vars = BTreeMap::from([("x".to_string(), Sort::Int)]);
        let maps = BTreeMap::new();
        let mut ev = Evaluator {
            model: Model::default(),
            on_missing: no_missing(),
            vars: &vars,
            maps: &maps,
        };
        ev.model.set("x", CVal::Int(7.into()));
        let f = Formula::implies(
            Formula::cmp(CmpOp::Ge, Term::var("x"), Term::int(5)),
            Formula::cmp(
                CmpOp::Eq,
                Term::add(Term::var("x"), Term::int(3)),
                Term::int(10),
            ),
        );
        assert!(ev.formula(&f));
        ev.model.set("x", CVal::Int(4.into()));
        assert!(ev.formula(&f)); // premise now false
    }

    #[test]
    fn select_resolves_through_store_chains() {
        let vars = BTreeMap::from([("to".to_string(), Sort::Addr)]);
        let maps = BTreeMap::from([("bal".to_string(), Sort::Int)]);
        let mut ev = Evaluator {
            model: Model::default(),
            on_missing: Box::new(|_, _| CVal::Int(0.into())),
            vars: &vars,
            maps: &maps,
        };
        ev.model.set("to", CVal::Addr(2));
        ev.model.set("bal[a2]", CVal::Int(50.into()));
        ev.model.set("bal[a1]", CVal::Int(9.into()));

        let stored = MapTerm::Store(
            Box::new(MapTerm::Base("bal".into())),
            vec![Term::Addr(1)],
            Box::new(Term::int(100)),
        );
        // bal[to] with to = a2 skips the store at a1.
        let read = Term::Select(stored.clone(), vec![Term::var("to")]);
        assert_eq!(ev.term(&read), CVal::Int(50.into()));
        // bal[a1] hits it.
        let read = Term::Select(stored, vec![Term::Addr(1)]);
        assert_eq!(ev.term(&read), CVal::Int(100.into()));
    }

    #[test]
    fn missing_values_are_invented_once_and_recorded() {
        let vars = BTreeMap::from([("y".to_string(), Sort::Int)]);
        let maps = BTreeMap::new();
        let mut calls = 0;
        {
            let mut ev = Evaluator {
                model: Model::default(),
                on_missing: Box::new(|_, _| {
                    calls += 1;
                    CVal::Int(42.into())
                }),
                vars: &vars,
                maps: &maps,
            };
            let t = Term::add(Term::var("y"), Term::var("y"));
            assert_eq!(ev.term(&t), CVal::Int(84.into()));
            assert_eq!(ev.model.get("y"), Some(&CVal::Int(42.into())));
        }
        assert_eq!(calls, 1);
    }

    #[test]
    fn linearize_folds_constants_and_rejects_products() {
        let t = Term::sub(
            Term::mul(Term::int(3), Term::var("x")),
            Term::add(Term::var("y"), Term::int(5)),
        );
        let lin = linearize(&t).unwrap();
        assert_eq!(lin.coeffs.get("x"), Some(&BigInt::from(3)));
        assert_eq!(lin.coeffs.get("y"), Some(&BigInt::from(-1)));
        assert_eq!(lin.k, BigInt::from(-5));

        let bad = Term::mul(Term::var("x"), Term::var("y"));
        assert_eq!(linearize(&bad), Err(NonLinear::Product));

        // x - x cancels to a constant.
        let cancel = Term::sub(Term::var("x"), Term::var("x"));
        let lin = linearize(&cancel).unwrap();
        assert!(lin.is_constant());
    }

    #[test]
    fn connective_constructors_fold_constants() {
        assert_eq!(Formula::and(vec![Formula::True, Formula::True]), Formula::True);
        assert_eq!(
            Formula::and(vec![Formula::True, Formula::False]),
            Formula::False
        );
        assert_eq!(Formula::or(vec![Formula::False]), Formula::False);
        assert_eq!(Formula::implies(Formula::False, Formula::False), Formula::True);
        assert_eq!(Formula::not(Formula::not(Formula::True)), Formula::True);
    }
}
