//! Lowers specification predicates onto symbolic state views.
//!
//! A [`StateView`] is one snapshot of the contract state as terms: slot
//! names to scalar terms (including the derived `sum(m)` and `len(x)`
//! slots) plus mapping base names to store chains. Pre-phase reads resolve
//! against one view, post-phase reads against another; the caller decides
//! which snapshot plays which role (entry/entry for preconditions,
//! entry/exit for postconditions, exit/exit for a contract invariant at a
//! return point).

use crate::lang::{Contract, Type};
use crate::logic::{Formula, MapTerm, Term};
use crate::spec::{ArithOp, Phase, Predicate, SpecExpr};
use num_bigint::BigInt;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Copy)]
pub(crate) struct StateView<'a> {
    pub scalars: &'a BTreeMap<String, Term>,
    pub maps: &'a BTreeMap<String, MapTerm>,
    /// Mapping bases stored to on this path. Their entry counts are no
    /// longer the frozen entry-state counts, so `len` reads must fail.
    pub written: &'a BTreeSet<String>,
}

impl StateView<'_> {
    fn scalar(&self, slot: &str) -> Result<Term, String> {
        self.scalars
            .get(slot)
            .cloned()
            .ok_or_else(|| format!("no scalar encoding for `{slot}`"))
    }

    fn map(&self, base: &str) -> Result<MapTerm, String> {
        self.maps
            .get(base)
            .cloned()
            .ok_or_else(|| format!("no mapping encoding for `{base}`"))
    }
}

pub(crate) struct EncodeCx<'a> {
    pub contract: &'a Contract,
    pub pre: StateView<'a>,
    pub post: StateView<'a>,
    /// Call-context values: parameters by name, `msg.sender`,
    /// `block.number`, and `len(p)` for sequence-typed parameters.
    pub params: &'a BTreeMap<String, Term>,
    pub param_types: &'a BTreeMap<String, Type>,
    pub max: &'a BigInt,
}

impl EncodeCx<'_> {
    fn view(&self, phase: Phase) -> &StateView<'_> {
        match phase {
            Phase::Pre => &self.pre,
            Phase::Post => &self.post,
        }
    }
}

pub(crate) fn encode_predicate(cx: &EncodeCx, p: &Predicate) -> Result<Formula, String> {
    Ok(match p {
        Predicate::False => Formula::False,
        Predicate::Atom(op, a, b) => Formula::cmp(*op, encode_expr(cx, a)?, encode_expr(cx, b)?),
        Predicate::And(ps) => {
            let fs = ps.iter().map(|q| encode_predicate(cx, q)).collect::<Result<_, _>>()?;
            Formula::and(fs)
        }
        Predicate::Or(ps) => {
            let fs = ps.iter().map(|q| encode_predicate(cx, q)).collect::<Result<_, _>>()?;
            Formula::or(fs)
        }
        Predicate::Implies(a, b) => {
            Formula::implies(encode_predicate(cx, a)?, encode_predicate(cx, b)?)
        }
    })
}

pub(crate) fn encode_expr(cx: &EncodeCx, e: &SpecExpr) -> Result<Term, String> {
    match e {
        SpecExpr::Int(n) => Ok(Term::Int(n.clone())),
        SpecExpr::Bool(b) => Ok(Term::Bool(*b)),
        SpecExpr::Addr(k) => Ok(Term::Addr(*k)),
        SpecExpr::Str(_) => Err("string values are outside the integer fragment".into()),
        SpecExpr::MaxValue => Ok(Term::Int(cx.max.clone())),
        SpecExpr::StateVar { name, phase } => {
            // Bare reference: only scalar state variables qualify.
            let decl = cx
                .contract
                .state_var(name)
                .ok_or_else(|| format!("unknown state variable `{name}`"))?;
            if decl.ty.is_value_type() && !matches!(decl.ty, Type::Str | Type::Bytes | Type::Array(_)) {
                cx.view(*phase).scalar(name)
            } else {
                Err(format!("`{name}` is not scalar-valued"))
            }
        }
        SpecExpr::Param(p) => cx
            .params
            .get(p)
            .cloned()
            .ok_or_else(|| format!("no value for parameter `{p}`")),
        SpecExpr::MsgSender => cx.params.get("msg.sender").cloned().ok_or_else(|| "no call context".into()),
        SpecExpr::BlockNumber => cx.params.get("block.number").cloned().ok_or_else(|| "no call context".into()),
        SpecExpr::Len(inner) => encode_len(cx, inner),
        SpecExpr::SumMap(inner) => encode_sum(cx, inner),
        SpecExpr::Index(..) | SpecExpr::Member(..) => encode_path(cx, e),
        SpecExpr::Arith(op, a, b) => {
            let ta = encode_expr(cx, a)?;
            let tb = encode_expr(cx, b)?;
            Ok(match op {
                ArithOp::Add => Term::add(ta, tb),
                ArithOp::Sub => Term::sub(ta, tb),
                ArithOp::Mul => Term::mul(ta, tb),
                ArithOp::Div => return Err("division is outside the linear fragment".into()),
            })
        }
    }
}

fn encode_len(cx: &EncodeCx, inner: &SpecExpr) -> Result<Term, String> {
    match inner {
        SpecExpr::StateVar { name, phase } => {
            let decl = cx
                .contract
                .state_var(name)
                .ok_or_else(|| format!("unknown state variable `{name}`"))?;
            match decl.ty {
                // A store can overwrite or insert, so the entry count after
                // a write to the mapping is not expressible.
                Type::Mapping(..) if *phase == Phase::Post && cx.post.written.contains(name) => {
                    Err(format!("entry count of `{name}` after writes to it"))
                }
                Type::Mapping(..) | Type::Array(_) | Type::Str | Type::Bytes => {
                    cx.view(*phase).scalar(&format!("len({name})"))
                }
                _ => Err(format!("`{name}` has no entry count")),
            }
        }
        SpecExpr::Param(p) => match cx.param_types.get(p) {
            Some(Type::Array(_) | Type::Str | Type::Bytes) => cx
                .params
                .get(&format!("len({p})"))
                .cloned()
                .ok_or_else(|| format!("no length for parameter `{p}`")),
            _ => Err(format!("parameter `{p}` has no entry count")),
        },
        _ => Err("entry count of a nested value".into()),
    }
}

fn encode_sum(cx: &EncodeCx, inner: &SpecExpr) -> Result<Term, String> {
    if let SpecExpr::StateVar { name, phase } = inner {
        // The slot exists exactly for single-key numeric-valued mappings;
        // anything else has no tracked sum.
        cx.view(*phase).scalar(&format!("sum({name})"))
    } else {
        Err("sum of a nested value".into())
    }
}

enum Step<'e> {
    Key(&'e SpecExpr),
    Field(&'e str),
}

/// Peels `Index`/`Member` selectors down to the root expression.
fn split_path(e: &SpecExpr) -> (&SpecExpr, Vec<Step<'_>>) {
    let mut steps = Vec::new();
    let mut cur = e;
    loop {
        match cur {
            SpecExpr::Index(b, k) => {
                steps.push(Step::Key(k));
                cur = b;
            }
            SpecExpr::Member(b, f) => {
                steps.push(Step::Field(f));
                cur = b;
            }
            _ => break,
        }
    }
    steps.reverse();
    (cur, steps)
}

fn encode_path(cx: &EncodeCx, e: &SpecExpr) -> Result<Term, String> {
    let (root, steps) = split_path(e);
    let (mut base, mut ty, phase): (String, Type, Phase) = match root {
        SpecExpr::StateVar { name, phase } => {
            let decl = cx
                .contract
                .state_var(name)
                .ok_or_else(|| format!("unknown state variable `{name}`"))?;
            (name.clone(), decl.ty.clone(), *phase)
        }
        SpecExpr::Param(p) => {
            let ty = cx
                .param_types
                .get(p)
                .ok_or_else(|| format!("unknown parameter `{p}`"))?;
            // Parameters are call-context values; their elements are the
            // entry-state contents regardless of phase.
            (p.clone(), ty.clone(), Phase::Pre)
        }
        _ => return Err("selector applied to a non-variable".into()),
    };
    let mut keys = Vec::new();
    for step in &steps {
        match (&ty, step) {
            (Type::Mapping(_, v), Step::Key(k)) => {
                keys.push(encode_expr(cx, k)?);
                ty = (**v).clone();
            }
            (Type::Array(el), Step::Key(k)) => {
                keys.push(encode_expr(cx, k)?);
                ty = (**el).clone();
            }
            (Type::Struct(sname), Step::Field(f)) => {
                let sd = cx
                    .struct_field(sname, f)
                    .ok_or_else(|| format!("`{sname}` has no field `{f}`"))?;
                base = format!("{base}.{f}");
                ty = sd;
            }
            _ => return Err(format!("selector does not match the type of `{base}`")),
        }
    }
    let scalar = matches!(ty, Type::Uint | Type::Int | Type::Bool | Type::Address);
    if !scalar {
        return Err(format!("read of `{base}` is not scalar-valued"));
    }
    if keys.is_empty() {
        // A chain of struct fields names a plain slot.
        cx.view(phase).scalar(&base)
    } else if matches!(root, SpecExpr::Param(_)) {
        Ok(Term::Select(MapTerm::Base(base), keys))
    } else {
        Ok(Term::Select(cx.view(phase).map(&base)?, keys))
    }
}

impl EncodeCx<'_> {
    fn struct_field(&self, sname: &str, field: &str) -> Option<Type> {
        let sd = self.contract.struct_decl(sname)?;
        sd.fields.iter().find(|f| f.name == field).map(|f| f.ty.clone())
    }
}
