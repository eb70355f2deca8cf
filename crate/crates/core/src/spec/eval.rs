//! Three-valued evaluation of specification predicates over execution
//! records and states.
//!
//! Atoms are strict: a fault in either operand (division by zero, index out
//! of bounds, missing call context) makes the atom undefined. Connectives
//! are Kleene: `false && undefined` is false, `true || undefined` is true,
//! and `false ==> undefined` is true. A missing mapping entry is not a
//! fault — it reads as the value type's default, matching execution.

use super::ast::*;
use crate::interp::{Call, ExecutionRecord, RunConfig};
use crate::lang::ast::{Contract, Type};
use crate::value::{ContractState, MapKey, Value};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bool3 {
    True,
    False,
    Undef,
}

impl Bool3 {
    pub fn from_bool(b: bool) -> Bool3 {
        if b {
            Bool3::True
        } else {
            Bool3::False
        }
    }

    pub fn is_true(self) -> bool {
        self == Bool3::True
    }

    pub fn is_false(self) -> bool {
        self == Bool3::False
    }

    pub fn is_undef(self) -> bool {
        self == Bool3::Undef
    }

    pub fn not3(self) -> Bool3 {
        match self {
            Bool3::True => Bool3::False,
            Bool3::False => Bool3::True,
            Bool3::Undef => Bool3::Undef,
        }
    }

    pub fn and3(self, other: Bool3) -> Bool3 {
        match (self, other) {
            (Bool3::False, _) | (_, Bool3::False) => Bool3::False,
            (Bool3::Undef, _) | (_, Bool3::Undef) => Bool3::Undef,
            _ => Bool3::True,
        }
    }

    pub fn or3(self, other: Bool3) -> Bool3 {
        match (self, other) {
            (Bool3::True, _) | (_, Bool3::True) => Bool3::True,
            (Bool3::Undef, _) | (_, Bool3::Undef) => Bool3::Undef,
            _ => Bool3::False,
        }
    }

    pub fn implies3(self, other: Bool3) -> Bool3 {
        self.not3().or3(other)
    }
}

/// Evaluation result of a specification expression. Numeric values collapse
/// to unbounded integers; compound values keep their declared type so that
/// absent entries can read as defaults.
#[derive(Debug, Clone, PartialEq)]
enum SV {
    Num(BigInt),
    Bool(bool),
    Addr(u32),
    Str(String),
    Bytes(Vec<u8>),
    Compound(Value, Type),
}

/// Marker for an undefined (faulted) evaluation.
struct Undef;

type EResult = Result<SV, Undef>;

fn to_sv(v: &Value, ty: &Type) -> SV {
    match v {
        Value::Uint(u) => SV::Num(BigInt::from(u.clone())),
        Value::Int(i) => SV::Num(i.clone()),
        Value::Bool(b) => SV::Bool(*b),
        Value::Addr(k) => SV::Addr(*k),
        Value::Str(s) => SV::Str(s.clone()),
        Value::Bytes(b) => SV::Bytes(b.clone()),
        compound => SV::Compound(compound.clone(), ty.clone()),
    }
}

pub struct EvalCtx<'a> {
    pub contract: &'a Contract,
    pub config: &'a RunConfig,
}

struct Env<'a> {
    pre: &'a ContractState,
    post: &'a ContractState,
    call: Option<&'a Call>,
}

impl<'a> EvalCtx<'a> {
    pub fn new(contract: &'a Contract, config: &'a RunConfig) -> Self {
        EvalCtx { contract, config }
    }

    /// Evaluates a statement against one record, or `None` when the record's
    /// function is outside the statement's scope. A contract invariant holds
    /// on a record iff it holds at both the pre- and the post-state.
    pub fn eval_on_record(&self, stmt_scope: &Scope, pred: &Predicate, rec: &ExecutionRecord) -> Option<Bool3> {
        match stmt_scope {
            Scope::ContractInv => {
                let at_pre = self.eval_on_state(pred, &rec.pre);
                let at_post = self.eval_on_state(pred, &rec.post);
                Some(at_pre.and3(at_post))
            }
            Scope::Requires(f) => {
                if rec.call.function != *f {
                    return None;
                }
                let env = Env { pre: &rec.pre, post: &rec.pre, call: Some(&rec.call) };
                Some(self.eval_pred(&env, pred))
            }
            Scope::Ensures(f) => {
                if rec.call.function != *f {
                    return None;
                }
                let env = Env { pre: &rec.pre, post: &rec.post, call: Some(&rec.call) };
                Some(self.eval_pred(&env, pred))
            }
        }
    }

    /// Single-state evaluation: every state-variable reference, regardless
    /// of phase, reads from `state`. Call context is unavailable.
    pub fn eval_on_state(&self, pred: &Predicate, state: &ContractState) -> Bool3 {
        let env = Env { pre: state, post: state, call: None };
        self.eval_pred(&env, pred)
    }

    /// Numeric value of an expression on a record under a scope's phase
    /// conventions, or `None` when the record is out of scope, the
    /// expression faults, or it is not numeric.
    pub fn numeric_value(
        &self,
        scope: &Scope,
        e: &SpecExpr,
        rec: &ExecutionRecord,
    ) -> Option<BigInt> {
        if let Some(f) = scope.function() {
            if rec.call.function != f {
                return None;
            }
        }
        let env = match scope {
            Scope::ContractInv | Scope::Requires(_) => {
                Env { pre: &rec.pre, post: &rec.pre, call: Some(&rec.call) }
            }
            Scope::Ensures(_) => Env { pre: &rec.pre, post: &rec.post, call: Some(&rec.call) },
        };
        match self.eval_expr(&env, e) {
            Ok(SV::Num(n)) => Some(n),
            _ => None,
        }
    }

    /// Numeric value of a state-only expression on one state.
    pub fn numeric_value_on_state(&self, e: &SpecExpr, state: &ContractState) -> Option<BigInt> {
        let env = Env { pre: state, post: state, call: None };
        match self.eval_expr(&env, e) {
            Ok(SV::Num(n)) => Some(n),
            _ => None,
        }
    }

    fn eval_pred(&self, env: &Env, pred: &Predicate) -> Bool3 {
        match pred {
            Predicate::False => Bool3::False,
            Predicate::Atom(op, lhs, rhs) => {
                let (l, r) = match (self.eval_expr(env, lhs), self.eval_expr(env, rhs)) {
                    (Ok(l), Ok(r)) => (l, r),
                    _ => return Bool3::Undef,
                };
                compare(*op, &l, &r)
            }
            Predicate::And(ps) => ps
                .iter()
                .fold(Bool3::True, |acc, p| acc.and3(self.eval_pred(env, p))),
            Predicate::Or(ps) => ps
                .iter()
                .fold(Bool3::False, |acc, p| acc.or3(self.eval_pred(env, p))),
            Predicate::Implies(a, b) => self
                .eval_pred(env, a)
                .implies3(self.eval_pred(env, b)),
        }
    }

    fn eval_expr(&self, env: &Env, e: &SpecExpr) -> EResult {
        match e {
            SpecExpr::Int(n) => Ok(SV::Num(n.clone())),
            SpecExpr::Bool(b) => Ok(SV::Bool(*b)),
            SpecExpr::Addr(k) => Ok(SV::Addr(*k)),
            SpecExpr::Str(s) => Ok(SV::Str(s.clone())),
            SpecExpr::MaxValue => Ok(SV::Num(BigInt::from(self.config.uint_max()))),
            SpecExpr::StateVar { name, phase } => {
                let state = match phase {
                    Phase::Pre => env.pre,
                    Phase::Post => env.post,
                };
                let decl = self.contract.state_var(name).ok_or(Undef)?;
                let v = state.get(name).ok_or(Undef)?;
                Ok(to_sv(v, &decl.ty))
            }
            SpecExpr::Param(name) => {
                let call = env.call.ok_or(Undef)?;
                let f = self.contract.function(&call.function).ok_or(Undef)?;
                let p = f.params.iter().find(|p| p.name == *name).ok_or(Undef)?;
                let v = call.args.get(name).ok_or(Undef)?;
                Ok(to_sv(v, &p.ty))
            }
            SpecExpr::MsgSender => Ok(SV::Addr(env.call.ok_or(Undef)?.sender)),
            SpecExpr::BlockNumber => Ok(SV::Num(BigInt::from(env.call.ok_or(Undef)?.block))),
            SpecExpr::Len(inner) => {
                let n = match self.eval_expr(env, inner)? {
                    SV::Compound(Value::Map(m), _) => m.len(),
                    SV::Compound(Value::Array(items), _) => items.len(),
                    SV::Bytes(b) => b.len(),
                    SV::Str(s) => s.chars().count(),
                    _ => return Err(Undef),
                };
                Ok(SV::Num(BigInt::from(n)))
            }
            SpecExpr::SumMap(inner) => {
                let SV::Compound(Value::Map(m), _) = self.eval_expr(env, inner)? else {
                    return Err(Undef);
                };
                let mut total = BigInt::zero();
                for v in m.values() {
                    match v {
                        Value::Uint(u) => total += BigInt::from(u.clone()),
                        Value::Int(i) => total += i,
                        _ => return Err(Undef),
                    }
                }
                Ok(SV::Num(total))
            }
            SpecExpr::Index(container, index) => {
                let c = self.eval_expr(env, container)?;
                let i = self.eval_expr(env, index)?;
                match c {
                    SV::Compound(Value::Map(m), Type::Mapping(kty, vty)) => {
                        let key = match (i, &*kty) {
                            (SV::Addr(k), Type::Address) => MapKey::Addr(k),
                            (SV::Num(n), Type::Uint) => {
                                if n.is_negative() {
                                    return Err(Undef);
                                }
                                MapKey::Uint(n.to_biguint().expect("non-negative"))
                            }
                            _ => return Err(Undef),
                        };
                        match m.get(&key) {
                            Some(v) => Ok(to_sv(v, &vty)),
                            None => Ok(to_sv(&Value::default_for(&vty, self.contract), &vty)),
                        }
                    }
                    SV::Compound(Value::Array(items), Type::Array(elem)) => {
                        let SV::Num(n) = i else { return Err(Undef) };
                        let idx = n.to_usize().ok_or(Undef)?;
                        let v = items.get(idx).ok_or(Undef)?;
                        Ok(to_sv(v, &elem))
                    }
                    _ => Err(Undef),
                }
            }
            SpecExpr::Member(container, field) => {
                let SV::Compound(Value::Struct(fields), Type::Struct(sname)) =
                    self.eval_expr(env, container)?
                else {
                    return Err(Undef);
                };
                let decl = self.contract.struct_decl(&sname).ok_or(Undef)?;
                let fdecl = decl.fields.iter().find(|f| f.name == *field).ok_or(Undef)?;
                let v = fields.get(field).ok_or(Undef)?;
                Ok(to_sv(v, &fdecl.ty))
            }
            SpecExpr::Arith(op, lhs, rhs) => {
                let (SV::Num(l), SV::Num(r)) =
                    (self.eval_expr(env, lhs)?, self.eval_expr(env, rhs)?)
                else {
                    return Err(Undef);
                };
                let out = match op {
                    ArithOp::Add => l + r,
                    ArithOp::Sub => l - r,
                    ArithOp::Mul => l * r,
                    ArithOp::Div => {
                        if r.is_zero() {
                            return Err(Undef);
                        }
                        l / r
                    }
                };
                Ok(SV::Num(out))
            }
        }
    }
}

fn compare(op: CmpOp, l: &SV, r: &SV) -> Bool3 {
    let eq = |b: bool| match op {
        CmpOp::Eq => Bool3::from_bool(b),
        CmpOp::Ne => Bool3::from_bool(!b),
        _ => Bool3::Undef,
    };
    match (l, r) {
        (SV::Num(a), SV::Num(b)) => {
            let holds = match op {
                CmpOp::Eq => a == b,
                CmpOp::Ne => a != b,
                CmpOp::Lt => a < b,
                CmpOp::Gt => a > b,
                CmpOp::Le => a <= b,
                CmpOp::Ge => a >= b,
            };
            Bool3::from_bool(holds)
        }
        (SV::Bool(a), SV::Bool(b)) => eq(a == b),
        (SV::Addr(a), SV::Addr(b)) => eq(a == b),
        (SV::Str(a), SV::Str(b)) => eq(a == b),
        (SV::Bytes(a), SV::Bytes(b)) => eq(a == b),
        _ => Bool3::Undef,
    }
}
