//! Interpreter: executes calls against contract state.
//!
//! Failed `require`/`assert`, explicit `revert`, checked-arithmetic
//! overflow, division by zero, and out-of-bounds indexing all revert the
//! whole call: the post-state of a reverted record equals its pre-state.

pub mod history;

use crate::lang::ast::*;
use crate::value::{canonicalize, default_state, ContractState, MapKey, Value};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    /// Machine width in bits for `uint`/`int`.
    pub width: u32,
    /// Addresses are `a0..aK` with `a0` the zero address.
    pub k_addresses: u32,
    /// Statement budget per call, bounding loops.
    pub fuel: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            width: 256,
            k_addresses: 4,
            fuel: 100_000,
        }
    }
}

impl RunConfig {
    pub fn uint_max(&self) -> BigUint {
        (BigUint::one() << self.width) - BigUint::one()
    }

    pub fn int_min(&self) -> BigInt {
        -(BigInt::one() << (self.width - 1))
    }

    pub fn int_max(&self) -> BigInt {
        (BigInt::one() << (self.width - 1)) - BigInt::one()
    }
}

/// One transaction request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Call {
    pub function: String,
    /// Arguments by parameter name.
    pub args: BTreeMap<String, Value>,
    /// Sender address index; `0` is the zero address.
    pub sender: u32,
    pub block: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TxStatus {
    Success,
    Reverted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionRecord {
    pub tx: u64,
    pub status: TxStatus,
    pub call: Call,
    pub pre: ContractState,
    pub post: ContractState,
}

pub type TraceSet = Vec<ExecutionRecord>;

/// Why a call reverted. The public trace format keeps only the status; the
/// cause is exposed for replay analysis (e.g. detecting assertion failures).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RevertCause {
    Require,
    Assert,
    Overflow,
    DivisionByZero,
    OutOfBounds,
    Explicit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CallOutcome {
    pub record: ExecutionRecord,
    pub revert_cause: Option<RevertCause>,
    pub return_value: Option<Value>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InterpError {
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("function `{0}` is not public")]
    NotPublic(String),
    #[error("call to `{function}`: {reason}")]
    BadCall { function: String, reason: String },
    #[error("address a{0} outside configured domain a0..a{1}")]
    AddressOutOfRange(u32, u32),
    #[error("fuel exhausted in `{0}`")]
    FuelExhausted(String),
    #[error("constructor takes parameters; supply an initial state instead")]
    ConstructorArgs,
}

enum Abort {
    Revert(RevertCause),
    Fail(InterpError),
}

enum Flow {
    Normal,
    Return(Option<Value>),
}

type EResult<T> = Result<T, Abort>;

/// Executes one call against `state`, returning the full outcome. Reverts
/// are reported in-band via the record status; `Err` means the call itself
/// was malformed or the fuel budget ran out.
pub fn execute_call(
    contract: &Contract,
    config: &RunConfig,
    state: &ContractState,
    call: &Call,
    tx: u64,
) -> Result<CallOutcome, InterpError> {
    let f = contract
        .function(&call.function)
        .ok_or_else(|| InterpError::UnknownFunction(call.function.clone()))?;
    if f.visibility != Visibility::Public {
        return Err(InterpError::NotPublic(call.function.clone()));
    }
    if call.sender > config.k_addresses {
        return Err(InterpError::AddressOutOfRange(call.sender, config.k_addresses));
    }
    validate_args(contract, config, f, &call.args)?;

    let mut exec = Exec {
        contract,
        config,
        state: state.clone(),
        frames: Vec::new(),
        sender: call.sender,
        block: call.block,
        fuel: config.fuel,
    };
    let args: Vec<(String, Value, Type)> = f
        .params
        .iter()
        .map(|p| (p.name.clone(), call.args[&p.name].clone(), p.ty.clone()))
        .collect();

    let (status, cause, ret) = match exec.run_function(f, args) {
        Ok(ret) => (TxStatus::Success, None, ret),
        Err(Abort::Revert(cause)) => (TxStatus::Reverted, Some(cause), None),
        Err(Abort::Fail(e)) => return Err(e),
    };
    let post = match status {
        TxStatus::Success => exec.state,
        TxStatus::Reverted => state.clone(),
    };
    Ok(CallOutcome {
        record: ExecutionRecord {
            tx,
            status,
            call: call.clone(),
            pre: state.clone(),
            post,
        },
        revert_cause: cause,
        return_value: ret,
    })
}

/// Replays `calls` in order from `init`, threading state through successes.
pub fn replay_history(
    contract: &Contract,
    config: &RunConfig,
    init: &ContractState,
    calls: &[Call],
) -> Result<Vec<CallOutcome>, InterpError> {
    let mut state = init.clone();
    let mut out = Vec::with_capacity(calls.len());
    for (i, call) in calls.iter().enumerate() {
        let outcome = execute_call(contract, config, &state, call, i as u64)?;
        if outcome.record.status == TxStatus::Success {
            state = outcome.record.post.clone();
        }
        out.push(outcome);
    }
    Ok(out)
}

/// Deployment state: defaults for every state variable, then the
/// zero-parameter constructor if one exists.
pub fn initial_state(contract: &Contract, config: &RunConfig) -> Result<ContractState, InterpError> {
    let mut state = default_state(contract);
    if let Some(ctor) = &contract.constructor {
        if !ctor.params.is_empty() {
            return Err(InterpError::ConstructorArgs);
        }
        let mut exec = Exec {
            contract,
            config,
            state: state.clone(),
            frames: Vec::new(),
            sender: 0,
            block: 0,
            fuel: config.fuel,
        };
        match exec.run_function(ctor, Vec::new()) {
            Ok(_) => state = exec.state,
            Err(Abort::Fail(e)) => return Err(e),
            Err(Abort::Revert(_)) => {
                return Err(InterpError::BadCall {
                    function: "constructor".to_string(),
                    reason: "constructor reverted".to_string(),
                })
            }
        }
    }
    Ok(state)
}

fn validate_args(
    contract: &Contract,
    config: &RunConfig,
    f: &Function,
    args: &BTreeMap<String, Value>,
) -> Result<(), InterpError> {
    let bad = |reason: String| InterpError::BadCall {
        function: f.name.clone(),
        reason,
    };
    for p in &f.params {
        let v = args
            .get(&p.name)
            .ok_or_else(|| bad(format!("missing argument `{}`", p.name)))?;
        if !v.type_matches(&p.ty, contract) {
            return Err(bad(format!("argument `{}` does not match type {}", p.name, p.ty)));
        }
        check_ranges(config, v).map_err(|r| bad(format!("argument `{}`: {r}", p.name)))?;
    }
    if args.len() != f.params.len() {
        return Err(bad("unexpected extra arguments".to_string()));
    }
    Ok(())
}

fn check_ranges(config: &RunConfig, v: &Value) -> Result<(), String> {
    match v {
        Value::Uint(n) => {
            if *n > config.uint_max() {
                return Err(format!("{n} exceeds the {}-bit range", config.width));
            }
        }
        Value::Int(n) => {
            if *n < config.int_min() || *n > config.int_max() {
                return Err(format!("{n} exceeds the {}-bit signed range", config.width));
            }
        }
        Value::Addr(k) => {
            if *k > config.k_addresses {
                return Err(format!("address a{k} outside a0..a{}", config.k_addresses));
            }
        }
        Value::Array(items) => {
            for it in items {
                check_ranges(config, it)?;
            }
        }
        Value::Map(entries) => {
            for val in entries.values() {
                check_ranges(config, val)?;
            }
        }
        Value::Struct(fields) => {
            for val in fields.values() {
                check_ranges(config, val)?;
            }
        }
        Value::Bool(_) | Value::Str(_) | Value::Bytes(_) => {}
    }
    Ok(())
}

struct Frame {
    vars: HashMap<String, Value>,
    types: HashMap<String, Type>,
}

struct Exec<'a> {
    contract: &'a Contract,
    config: &'a RunConfig,
    state: ContractState,
    frames: Vec<Frame>,
    sender: u32,
    block: u64,
    fuel: u64,
}

impl<'a> Exec<'a> {
    fn run_function(
        &mut self,
        f: &Function,
        args: Vec<(String, Value, Type)>,
    ) -> EResult<Option<Value>> {
        let mut frame = Frame {
            vars: HashMap::new(),
            types: HashMap::new(),
        };
        for (name, value, ty) in args {
            frame.vars.insert(name.clone(), value);
            frame.types.insert(name, ty);
        }
        self.frames.push(frame);
        let flow = self.exec_block(&f.body);
        self.frames.pop();
        match flow? {
            Flow::Return(v) => Ok(v),
            Flow::Normal => Ok(f
                .returns
                .as_ref()
                .map(|rt| Value::default_for(rt, self.contract))),
        }
    }

    fn charge(&mut self, site: &str) -> EResult<()> {
        if self.fuel == 0 {
            return Err(Abort::Fail(InterpError::FuelExhausted(site.to_string())));
        }
        self.fuel -= 1;
        Ok(())
    }

    fn frame(&mut self) -> &mut Frame {
        self.frames.last_mut().expect("active call frame")
    }

    fn exec_block(&mut self, stmts: &[Stmt]) -> EResult<Flow> {
        for s in stmts {
            match self.exec_stmt(s)? {
                Flow::Normal => {}
                ret => return Ok(ret),
            }
        }
        Ok(Flow::Normal)
    }

    fn exec_stmt(&mut self, stmt: &Stmt) -> EResult<Flow> {
        self.charge("statement")?;
        match stmt {
            Stmt::Local { name, ty, init } => {
                let value = match init {
                    Some(e) => self.eval(e, false)?,
                    None => Value::default_for(ty, self.contract),
                };
                let frame = self.frame();
                frame.vars.insert(name.clone(), value);
                frame.types.insert(name.clone(), ty.clone());
                Ok(Flow::Normal)
            }
            Stmt::Assign { target, value } => {
                let v = self.eval(value, false)?;
                self.assign(target, v)?;
                Ok(Flow::Normal)
            }
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                if self.eval_bool(cond)? {
                    self.exec_block(then_branch)
                } else {
                    self.exec_block(else_branch)
                }
            }
            Stmt::For {
                init,
                cond,
                update,
                body,
            } => {
                self.exec_stmt(init)?;
                loop {
                    self.charge("loop")?;
                    if !self.eval_bool(cond)? {
                        break;
                    }
                    match self.exec_block(body)? {
                        Flow::Normal => {}
                        ret => return Ok(ret),
                    }
                    self.exec_stmt(update)?;
                }
                Ok(Flow::Normal)
            }
            Stmt::Require(cond) => {
                if self.eval_bool(cond)? {
                    Ok(Flow::Normal)
                } else {
                    Err(Abort::Revert(RevertCause::Require))
                }
            }
            Stmt::Assert(cond) => {
                if self.eval_bool(cond)? {
                    Ok(Flow::Normal)
                } else {
                    Err(Abort::Revert(RevertCause::Assert))
                }
            }
            Stmt::Revert => Err(Abort::Revert(RevertCause::Explicit)),
            Stmt::Return(value) => {
                let v = match value {
                    Some(e) => Some(self.eval(e, false)?),
                    None => None,
                };
                Ok(Flow::Return(v))
            }
            Stmt::Call { callee, args } => {
                self.call_internal(callee, args)?;
                Ok(Flow::Normal)
            }
        }
    }

    fn call_internal(&mut self, callee: &str, args: &[Expr]) -> EResult<Option<Value>> {
        let f = self
            .contract
            .function(callee)
            .ok_or_else(|| Abort::Fail(InterpError::UnknownFunction(callee.to_string())))?;
        let mut bound = Vec::with_capacity(args.len());
        for (a, p) in args.iter().zip(&f.params) {
            let v = self.eval(a, false)?;
            bound.push((p.name.clone(), v, p.ty.clone()));
        }
        self.run_function(f, bound)
    }

    fn eval_bool(&mut self, e: &Expr) -> EResult<bool> {
        match self.eval(e, false)? {
            Value::Bool(b) => Ok(b),
            other => unreachable!("type checking guarantees bool, got {other:?}"),
        }
    }

    fn lookup_var(&self, name: &str) -> Option<&Value> {
        if let Some(frame) = self.frames.last() {
            if let Some(v) = frame.vars.get(name) {
                return Some(v);
            }
        }
        self.state.get(name)
    }

    /// Evaluates an expression. `wrap` is true inside `unchecked(...)`:
    /// add/sub/mul wrap modulo 2^width instead of reverting.
    fn eval(&mut self, e: &Expr, wrap: bool) -> EResult<Value> {
        match &e.kind {
            ExprKind::Number(n) => match e.ty {
                Type::Int => Ok(Value::Int(BigInt::from(n.clone()))),
                _ => Ok(Value::Uint(n.clone())),
            },
            ExprKind::Bool(b) => Ok(Value::Bool(*b)),
            ExprKind::Str(s) => Ok(Value::Str(s.clone())),
            ExprKind::AddrLit(k) => {
                if *k > self.config.k_addresses {
                    Err(Abort::Fail(InterpError::AddressOutOfRange(
                        *k,
                        self.config.k_addresses,
                    )))
                } else {
                    Ok(Value::Addr(*k))
                }
            }
            ExprKind::Var(name) => Ok(self
                .lookup_var(name)
                .unwrap_or_else(|| unreachable!("unknown variable `{name}` after type checking"))
                .clone()),
            ExprKind::MsgSender => Ok(Value::Addr(self.sender)),
            ExprKind::BlockNumber => Ok(Value::Uint(BigUint::from(self.block))),
            ExprKind::Index(container, idx) => {
                let c = self.eval(container, wrap)?;
                let i = self.eval(idx, wrap)?;
                match c {
                    Value::Map(entries) => {
                        let key = to_map_key(i);
                        match entries.get(&key) {
                            Some(v) => Ok(v.clone()),
                            None => {
                                let vty = match &container.ty {
                                    Type::Mapping(_, v) => v,
                                    other => unreachable!("indexed non-mapping {other}"),
                                };
                                Ok(Value::default_for(vty, self.contract))
                            }
                        }
                    }
                    Value::Array(items) => {
                        let n = match i {
                            Value::Uint(n) => n,
                            other => unreachable!("array index {other:?}"),
                        };
                        match n.to_usize().and_then(|k| items.get(k)) {
                            Some(v) => Ok(v.clone()),
                            None => Err(Abort::Revert(RevertCause::OutOfBounds)),
                        }
                    }
                    other => unreachable!("indexed {other:?}"),
                }
            }
            ExprKind::Member(container, field) => {
                let c = self.eval(container, wrap)?;
                match c {
                    Value::Struct(fields) => Ok(fields
                        .get(field)
                        .unwrap_or_else(|| unreachable!("missing field `{field}`"))
                        .clone()),
                    other => unreachable!("member access on {other:?}"),
                }
            }
            ExprKind::Length(inner) => {
                let v = self.eval(inner, wrap)?;
                let n = match v {
                    Value::Array(items) => items.len(),
                    Value::Bytes(b) => b.len(),
                    Value::Str(s) => s.chars().count(),
                    other => unreachable!("length of {other:?}"),
                };
                Ok(Value::Uint(BigUint::from(n)))
            }
            ExprKind::Unary(UnOp::Not, inner) => {
                let v = self.eval(inner, wrap)?;
                match v {
                    Value::Bool(b) => Ok(Value::Bool(!b)),
                    other => unreachable!("! on {other:?}"),
                }
            }
            ExprKind::Binary(op, lhs, rhs) => self.eval_binary(*op, lhs, rhs, wrap),
            ExprKind::Unchecked(inner) => self.eval(inner, true),
            ExprKind::Call { callee, args } => {
                let ret = self.call_internal(callee, args)?;
                Ok(ret.expect("expression calls return a value after type checking"))
            }
        }
    }

    fn eval_binary(&mut self, op: BinOp, lhs: &Expr, rhs: &Expr, wrap: bool) -> EResult<Value> {
        // Short-circuit logical operators.
        if op == BinOp::And {
            let l = self.eval(lhs, wrap)?;
            return match l {
                Value::Bool(false) => Ok(Value::Bool(false)),
                Value::Bool(true) => self.eval(rhs, wrap),
                other => unreachable!("&& on {other:?}"),
            };
        }
        if op == BinOp::Or {
            let l = self.eval(lhs, wrap)?;
            return match l {
                Value::Bool(true) => Ok(Value::Bool(true)),
                Value::Bool(false) => self.eval(rhs, wrap),
                other => unreachable!("|| on {other:?}"),
            };
        }

        let l = self.eval(lhs, wrap)?;
        let r = self.eval(rhs, wrap)?;

        if op.is_equality() {
            let eq = l == r;
            return Ok(Value::Bool(if op == BinOp::Eq { eq } else { !eq }));
        }
        if op.is_comparison() {
            let ord = match (&l, &r) {
                (Value::Uint(a), Value::Uint(b)) => a.cmp(b),
                (Value::Int(a), Value::Int(b)) => a.cmp(b),
                other => unreachable!("comparison on {other:?}"),
            };
            let ok = match op {
                BinOp::Lt => ord.is_lt(),
                BinOp::Gt => ord.is_gt(),
                BinOp::Le => ord.is_le(),
                BinOp::Ge => ord.is_ge(),
                _ => unreachable!(),
            };
            return Ok(Value::Bool(ok));
        }

        match (l, r) {
            (Value::Uint(a), Value::Uint(b)) => self.uint_arith(op, a, b, wrap),
            (Value::Int(a), Value::Int(b)) => self.int_arith(op, a, b, wrap),
            other => unreachable!("arithmetic on {other:?}"),
        }
    }

    fn uint_arith(&self, op: BinOp, a: BigUint, b: BigUint, wrap: bool) -> EResult<Value> {
        let max = self.config.uint_max();
        let modulus = BigUint::one() << self.config.width;
        let v = match op {
            BinOp::Add => {
                let s = a + b;
                if s > max {
                    if wrap {
                        s % &modulus
                    } else {
                        return Err(Abort::Revert(RevertCause::Overflow));
                    }
                } else {
                    s
                }
            }
            BinOp::Sub => {
                if b > a {
                    if wrap {
                        // a - b mod 2^w
                        (&modulus + a - (b % &modulus)) % &modulus
                    } else {
                        return Err(Abort::Revert(RevertCause::Overflow));
                    }
                } else {
                    a - b
                }
            }
            BinOp::Mul => {
                let p = a * b;
                if p > max {
                    if wrap {
                        p % &modulus
                    } else {
                        return Err(Abort::Revert(RevertCause::Overflow));
                    }
                } else {
                    p
                }
            }
            BinOp::Div => {
                if b.is_zero() {
                    return Err(Abort::Revert(RevertCause::DivisionByZero));
                }
                a / b
            }
            _ => unreachable!(),
        };
        Ok(Value::Uint(v))
    }

    fn int_arith(&self, op: BinOp, a: BigInt, b: BigInt, wrap: bool) -> EResult<Value> {
        let (lo, hi) = (self.config.int_min(), self.config.int_max());
        let v = match op {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div => {
                if b.is_zero() {
                    return Err(Abort::Revert(RevertCause::DivisionByZero));
                }
                // Truncated division; overflow only at int_min / -1.
                a / b
            }
            _ => unreachable!(),
        };
        if v < lo || v > hi {
            if wrap {
                let modulus = BigInt::one() << self.config.width;
                let half = BigInt::one() << (self.config.width - 1);
                let mut m = (v + &half) % &modulus;
                if m.is_negative() {
                    m += &modulus;
                }
                Ok(Value::Int(m - half))
            } else {
                Err(Abort::Revert(RevertCause::Overflow))
            }
        } else {
            Ok(Value::Int(v))
        }
    }

    fn assign(&mut self, target: &LValue, value: Value) -> EResult<()> {
        // Resolve the base container and its type, preferring locals.
        let in_frame = self
            .frames
            .last()
            .is_some_and(|f| f.vars.contains_key(&target.base));
        let base_ty = if in_frame {
            self.frames
                .last()
                .and_then(|f| f.types.get(&target.base))
                .cloned()
                .expect("frame variables carry their declared type")
        } else {
            self.contract
                .state_var(&target.base)
                .map(|v| v.ty.clone())
                .unwrap_or_else(|| unreachable!("unknown assignment target `{}`", target.base))
        };

        // Indices must be evaluated before taking the container out, since
        // they may read other state.
        let mut keys = Vec::new();
        for acc in &target.accessors {
            match acc {
                Accessor::Index(e) => keys.push(Some(self.eval(e, false)?)),
                Accessor::Member(_) => keys.push(None),
            }
        }

        let mut container = if in_frame {
            self.frame().vars.remove(&target.base).expect("checked above")
        } else {
            self.state
                .remove(&target.base)
                .unwrap_or_else(|| Value::default_for(&base_ty, self.contract))
        };

        let result = self.store(&mut container, &base_ty, &target.accessors, &keys, value);
        let mut final_value = container;
        if result.is_ok() {
            canonicalize(&mut final_value, &base_ty, self.contract);
        }
        if in_frame {
            self.frame().vars.insert(target.base.clone(), final_value);
        } else {
            self.state.insert(target.base.clone(), final_value);
        }
        result
    }

    fn store(
        &mut self,
        container: &mut Value,
        ty: &Type,
        accessors: &[Accessor],
        keys: &[Option<Value>],
        value: Value,
    ) -> EResult<()> {
        let Some(acc) = accessors.first() else {
            *container = value;
            return Ok(());
        };
        match (acc, container) {
            (Accessor::Index(_), Value::Map(entries)) => {
                let (kty, vty) = match ty {
                    Type::Mapping(k, v) => (&**k, &**v),
                    other => unreachable!("indexed non-mapping type {other}"),
                };
                let _ = kty;
                let key = to_map_key(keys[0].clone().expect("index key evaluated"));
                let entry = entries
                    .entry(key)
                    .or_insert_with(|| Value::default_for(vty, self.contract));
                self.store(entry, vty, &accessors[1..], &keys[1..], value)
            }
            (Accessor::Index(_), Value::Array(items)) => {
                let ety = match ty {
                    Type::Array(e) => &**e,
                    other => unreachable!("indexed non-array type {other}"),
                };
                let idx = match keys[0].clone().expect("index key evaluated") {
                    Value::Uint(n) => n,
                    other => unreachable!("array index {other:?}"),
                };
                let slot = idx
                    .to_usize()
                    .and_then(|k| items.get_mut(k))
                    .ok_or(Abort::Revert(RevertCause::OutOfBounds))?;
                self.store(slot, ety, &accessors[1..], &keys[1..], value)
            }
            (Accessor::Member(field), Value::Struct(fields)) => {
                let sname = match ty {
                    Type::Struct(n) => n,
                    other => unreachable!("member on non-struct type {other}"),
                };
                let fty = self
                    .contract
                    .struct_decl(sname)
                    .and_then(|d| d.fields.iter().find(|f| f.name == *field))
                    .map(|f| f.ty.clone())
                    .unwrap_or_else(|| unreachable!("missing field `{field}`"));
                let slot = fields
                    .get_mut(field)
                    .unwrap_or_else(|| unreachable!("missing field `{field}`"));
                self.store(slot, &fty, &accessors[1..], &keys[1..], value)
            }
            (acc, container) => unreachable!("accessor {acc:?} on {container:?}"),
        }
    }
}

fn to_map_key(v: Value) -> MapKey {
    match v {
        Value::Addr(k) => MapKey::Addr(k),
        Value::Uint(n) => MapKey::Uint(n),
        other => unreachable!("map key {other:?}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_contract;

    fn token() -> Contract {
        parse_contract(
            "t.mc",
            r#"contract T {
                uint totalSupply;
                mapping(address => uint) balances;
                mapping(address => mapping(address => uint)) allows;
                function transferFrom(address from, address to, uint tokens) public returns (bool) {
                    require(msg.sender != address(0));
                    if (to == address(0)) {
                        return false;
                    }
                    allows[from][msg.sender] = allows[from][msg.sender].sub(tokens);
                    balances[from] = balances[from].sub(tokens);
                    balances[to] = balances[to].add(tokens);
                    return true;
                }
            }"#,
        )
        .unwrap()
    }

    fn token_state() -> ContractState {
        let c = token();
        let mut state = default_state(&c);
        state.insert("totalSupply".into(), Value::uint(1000));
        let mut bal = BTreeMap::new();
        bal.insert(MapKey::Addr(1), Value::uint(600));
        bal.insert(MapKey::Addr(2), Value::uint(400));
        state.insert("balances".into(), Value::Map(bal));
        let mut inner = BTreeMap::new();
        inner.insert(MapKey::Addr(3), Value::uint(50));
        let mut allows = BTreeMap::new();
        allows.insert(MapKey::Addr(1), Value::Map(inner));
        state.insert("allows".into(), Value::Map(allows));
        state
    }

    fn call(function: &str, sender: u32, args: &[(&str, Value)]) -> Call {
        Call {
            function: function.into(),
            args: args.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            sender,
            block: 1,
        }
    }

    fn transfer(from: u32, to: u32, tokens: u64, sender: u32) -> Call {
        call(
            "transferFrom",
            sender,
            &[
                ("from", Value::Addr(from)),
                ("to", Value::Addr(to)),
                ("tokens", Value::uint(tokens)),
            ],
        )
    }

    #[test]
    fn successful_transfer_moves_balance_and_allowance() {
        let c = token();
        let cfg = RunConfig::default();
        let out = execute_call(&c, &cfg, &token_state(), &transfer(1, 2, 30, 3), 0).unwrap();
        assert_eq!(out.record.status, TxStatus::Success);
        assert_eq!(out.return_value, Some(Value::Bool(true)));
        let post = &out.record.post;
        let bal = match &post["balances"] {
            Value::Map(m) => m,
            _ => unreachable!(),
        };
        assert_eq!(bal[&MapKey::Addr(1)], Value::uint(570));
        assert_eq!(bal[&MapKey::Addr(2)], Value::uint(430));
        let allows = match &post["allows"] {
            Value::Map(m) => m,
            _ => unreachable!(),
        };
        let inner = match &allows[&MapKey::Addr(1)] {
            Value::Map(m) => m,
            _ => unreachable!(),
        };
        assert_eq!(inner[&MapKey::Addr(3)], Value::uint(20));
    }

    #[test]
    fn insufficient_allowance_reverts_atomically() {
        let c = token();
        let cfg = RunConfig::default();
        let pre = token_state();
        // Allowance for (a1, sender a2) is zero; checked sub underflows.
        let out = execute_call(&c, &cfg, &pre, &transfer(1, 2, 30, 2), 0).unwrap();
        assert_eq!(out.record.status, TxStatus::Reverted);
        assert_eq!(out.revert_cause, Some(RevertCause::Overflow));
        assert_eq!(out.record.post, pre, "revert must restore the pre-state");
    }

    #[test]
    fn zero_recipient_returns_early_without_changes() {
        let c = token();
        let cfg = RunConfig::default();
        let pre = token_state();
        let out = execute_call(&c, &cfg, &pre, &transfer(1, 0, 30, 3), 0).unwrap();
        assert_eq!(out.record.status, TxStatus::Success);
        assert_eq!(out.return_value, Some(Value::Bool(false)));
        assert_eq!(out.record.post, pre);
    }

    #[test]
    fn zero_sender_fails_require() {
        let c = token();
        let cfg = RunConfig::default();
        let out = execute_call(&c, &cfg, &token_state(), &transfer(1, 2, 1, 0), 0).unwrap();
        assert_eq!(out.record.status, TxStatus::Reverted);
        assert_eq!(out.revert_cause, Some(RevertCause::Require));
    }

    #[test]
    fn allowance_entry_at_zero_is_removed() {
        let c = token();
        let cfg = RunConfig::default();
        let out = execute_call(&c, &cfg, &token_state(), &transfer(1, 2, 50, 3), 0).unwrap();
        assert_eq!(out.record.status, TxStatus::Success);
        // allows[a1][a3] dropped to 0, so the whole a1 entry disappears.
        assert_eq!(out.record.post["allows"], Value::Map(BTreeMap::new()));
    }

    #[test]
    fn partial_updates_roll_back_on_late_overflow() {
        let c = parse_contract(
            "t.mc",
            r#"contract C {
                uint a;
                uint b;
                function f(uint x) public {
                    a = a + x;
                    b = b + x;
                }
            }"#,
        )
        .unwrap();
        let cfg = RunConfig { width: 8, ..RunConfig::default() };
        let mut pre = default_state(&c);
        pre.insert("a".into(), Value::uint(0));
        pre.insert("b".into(), Value::uint(250));
        let out = execute_call(&c, &cfg, &pre, &call("f", 1, &[("x", Value::uint(10))]), 0).unwrap();
        assert_eq!(out.record.status, TxStatus::Reverted);
        assert_eq!(out.revert_cause, Some(RevertCause::Overflow));
        assert_eq!(out.record.post, pre, "first write must roll back too");
    }

    #[test]
    fn unchecked_wraps_modulo_width() {
        let c = parse_contract(
            "t.mc",
            "contract C { uint x; function f(uint a, uint b) public { x = unchecked(a + b); } }",
        )
        .unwrap();
        let cfg = RunConfig { width: 8, ..RunConfig::default() };
        let pre = default_state(&c);
        let out = execute_call(
            &c,
            &cfg,
            &pre,
            &call("f", 1, &[("a", Value::uint(250)), ("b", Value::uint(10))]),
            0,
        )
        .unwrap();
        assert_eq!(out.record.status, TxStatus::Success);
        assert_eq!(out.record.post["x"], Value::uint(4));
    }

    #[test]
    fn division_by_zero_reverts_even_unchecked() {
        let c = parse_contract(
            "t.mc",
            "contract C { uint x; function f(uint a) public { x = unchecked(10 / a); } }",
        )
        .unwrap();
        let cfg = RunConfig::default();
        let out = execute_call(
            &c,
            &cfg,
            &default_state(&c),
            &call("f", 1, &[("a", Value::uint(0))]),
            0,
        )
        .unwrap();
        assert_eq!(out.record.status, TxStatus::Reverted);
        assert_eq!(out.revert_cause, Some(RevertCause::DivisionByZero));
    }

    #[test]
    fn assert_failure_reports_assert_cause() {
        let c = parse_contract(
            "t.mc",
            "contract C { uint x; function f() public { assert(x == 1); } }",
        )
        .unwrap();
        let out = execute_call(
            &c,
            &RunConfig::default(),
            &default_state(&c),
            &call("f", 1, &[]),
            0,
        )
        .unwrap();
        assert_eq!(out.revert_cause, Some(RevertCause::Assert));
    }

    #[test]
    fn internal_calls_share_state_and_revert_whole_call() {
        let c = parse_contract(
            "t.mc",
            r#"contract C {
                uint x;
                function bump(uint v) internal {
                    x = x + v;
                    require(x < 100);
                }
                function f(uint v) public {
                    bump(v);
                    bump(v);
                }
            }"#,
        )
        .unwrap();
        let cfg = RunConfig::default();
        let pre = default_state(&c);
        let ok = execute_call(&c, &cfg, &pre, &call("f", 1, &[("v", Value::uint(10))]), 0).unwrap();
        assert_eq!(ok.record.post["x"], Value::uint(20));
        let bad = execute_call(&c, &cfg, &pre, &call("f", 1, &[("v", Value::uint(60))]), 0).unwrap();
        assert_eq!(bad.record.status, TxStatus::Reverted);
        assert_eq!(bad.record.post, pre);
    }

    #[test]
    fn loops_execute_and_fuel_bounds_them() {
        let c = parse_contract(
            "t.mc",
            r#"contract C {
                uint total;
                function f(uint n) public {
                    for (uint i = 0; i < n; i++) {
                        total = total + 2;
                    }
                }
            }"#,
        )
        .unwrap();
        let cfg = RunConfig::default();
        let pre = default_state(&c);
        let out = execute_call(&c, &cfg, &pre, &call("f", 1, &[("n", Value::uint(5))]), 0).unwrap();
        assert_eq!(out.record.post["total"], Value::uint(10));

        let tight = RunConfig { fuel: 50, ..cfg };
        let err = execute_call(&c, &tight, &pre, &call("f", 1, &[("n", Value::uint(1000))]), 0)
            .unwrap_err();
        assert!(matches!(err, InterpError::FuelExhausted(_)));
    }

    #[test]
    fn array_out_of_bounds_reverts() {
        let c = parse_contract(
            "t.mc",
            "contract C { uint x; function f(uint[] xs) public { x = xs[3]; } }",
        )
        .unwrap();
        let out = execute_call(
            &c,
            &RunConfig::default(),
            &default_state(&c),
            &call("f", 1, &[("xs", Value::Array(vec![Value::uint(7)]))]),
            0,
        )
        .unwrap();
        assert_eq!(out.record.status, TxStatus::Reverted);
        assert_eq!(out.revert_cause, Some(RevertCause::OutOfBounds));
    }

    #[test]
    fn falling_off_the_end_returns_the_default() {
        let c = parse_contract(
            "t.mc",
            "contract C { uint x; function f() public returns (bool) { x = 1; } }",
        )
        .unwrap();
        let out = execute_call(
            &c,
            &RunConfig::default(),
            &default_state(&c),
            &call("f", 1, &[]),
            0,
        )
        .unwrap();
        assert_eq!(out.return_value, Some(Value::Bool(false)));
    }

    #[test]
    fn replay_threads_state_only_through_successes() {
        let c = token();
        let cfg = RunConfig::default();
        let calls = vec![
            transfer(1, 2, 30, 3),  // success
            transfer(1, 2, 500, 3), // reverts: allowance exceeded
            transfer(1, 2, 20, 3),  // success
        ];
        let outs = replay_history(&c, &cfg, &token_state(), &calls).unwrap();
        let statuses: Vec<TxStatus> = outs.iter().map(|o| o.record.status).collect();
        assert_eq!(
            statuses,
            vec![TxStatus::Success, TxStatus::Reverted, TxStatus::Success]
        );
        assert_eq!(outs[1].record.pre, outs[0].record.post);
        assert_eq!(outs[2].record.pre, outs[1].record.post);
        let bal = match &outs[2].record.post["balances"] {
            Value::Map(m) => m,
            _ => unreachable!(),
        };
        assert_eq!(bal[&MapKey::Addr(1)], Value::uint(550));
    }

    #[test]
    fn rejects_out_of_domain_arguments() {
        let c = token();
        let cfg = RunConfig::default();
        let err = execute_call(&c, &cfg, &token_state(), &transfer(9, 2, 1, 3), 0).unwrap_err();
        assert!(matches!(err, InterpError::BadCall { .. }));
        let err2 = execute_call(&c, &cfg, &token_state(), &transfer(1, 2, 1, 9), 0).unwrap_err();
        assert!(matches!(err2, InterpError::AddressOutOfRange(9, 4)));
    }

    #[test]
    fn constructor_populates_initial_state() {
        let c = parse_contract(
            "t.mc",
            r#"contract C {
                uint supply;
                mapping(address => uint) bal;
                constructor() {
                    supply = 100;
                    bal[address(1)] = 100;
                }
            }"#,
        )
        .unwrap();
        let st = initial_state(&c, &RunConfig::default()).unwrap();
        assert_eq!(st["supply"], Value::uint(100));
        let bal = match &st["bal"] {
            Value::Map(m) => m,
            _ => unreachable!(),
        };
        assert_eq!(bal[&MapKey::Addr(1)], Value::uint(100));
    }
}
