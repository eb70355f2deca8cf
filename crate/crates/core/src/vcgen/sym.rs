//! Symbolic forward execution of a function body.
//!
//! State variables, parameters, and call context start as named symbols;
//! statements build terms over them and accumulate path assumptions. Every
//! construct that reverts at runtime (checked arithmetic, `require`,
//! out-of-bounds reads) instead contributes the non-reverting assumption,
//! so each surviving path describes exactly the executions that complete.
//! Constructs outside the supported fragment stop the path with a reason
//! rather than guessing.

use super::Symbols;
use crate::lang::ast::{
    Accessor, BinOp, Contract, Expr, ExprKind, Function, LValue, Stmt, Type, UnOp, VarDecl,
};
use crate::logic::{
    discharge, BackendConfig, Formula, MapTerm, ObligationSource, Term, VerificationQuery,
};
use crate::spec::CmpOp;
use num_bigint::BigInt;
use num_traits::One;
use std::collections::{BTreeMap, BTreeSet};

const CALL_DEPTH_LIMIT: u32 = 8;

pub(crate) struct Vcx<'a> {
    pub contract: &'a Contract,
    pub config: &'a BackendConfig,
    pub symbols: Symbols,
    pub collect_asserts: bool,
    pub asserts: Vec<AssertSite>,
    fresh: u64,
}

/// An `assert` reached on some path: obligation plus the assumptions that
/// were in force at the statement.
pub(crate) struct AssertSite {
    pub label: String,
    pub tag: String,
    pub path: Vec<Formula>,
    pub check: Formula,
}

impl<'a> Vcx<'a> {
    pub fn new(contract: &'a Contract, config: &'a BackendConfig) -> Vcx<'a> {
        Vcx {
            contract,
            config,
            symbols: Symbols::default(),
            collect_asserts: false,
            asserts: Vec::new(),
            fresh: 0,
        }
    }

    fn fresh_int(&mut self, kind: &str, lo: Option<BigInt>, hi: Option<BigInt>) -> Term {
        let name = format!("{kind}%{}", self.fresh);
        self.fresh += 1;
        self.symbols.int_var(&name, lo, hi);
        Term::Var(name)
    }

    fn fresh_bool(&mut self) -> Term {
        let name = format!("flag%{}", self.fresh);
        self.fresh += 1;
        self.symbols.bool_var(&name);
        Term::Var(name)
    }

    fn signed_range(&self) -> (BigInt, BigInt) {
        let half = BigInt::one() << (self.config.width - 1);
        (-half.clone(), half - 1)
    }
}

/// Why expression evaluation could not continue on this path.
pub(crate) enum Stop {
    /// Outside the supported fragment; the path survives as "blocked".
    Blocked(String),
    /// Every execution along the path reverts here; the path vanishes.
    Reverted,
}

type ER<T> = Result<T, Stop>;

fn blocked<T>(msg: impl Into<String>) -> ER<T> {
    Err(Stop::Blocked(msg.into()))
}

#[derive(Clone)]
pub(crate) struct SymState {
    /// State scalars plus derived slots: `x.f` struct fields, `sum(m)`
    /// mapping sums, `len(x)` entry counts.
    pub scalars: BTreeMap<String, Term>,
    pub maps: BTreeMap<String, MapTerm>,
    /// Mapping bases stored to on this path.
    pub written: BTreeSet<String>,
    locals: BTreeMap<String, Term>,
    local_maps: BTreeMap<String, MapTerm>,
    local_types: BTreeMap<String, Type>,
    /// Key prefix for locals of the function currently executing; empty at
    /// the top level, `callee%depth%` inside an inlined call.
    scope: String,
    depth: u32,
    pub path: Vec<Formula>,
    pub tag: String,
    pub alive: bool,
    effects: u64,
}

impl SymState {
    fn local_key(&self, name: &str) -> String {
        format!("{}{}", self.scope, name)
    }

    fn assume(&mut self, f: Formula) {
        self.effects += 1;
        match f {
            Formula::True => {}
            Formula::False => self.alive = false,
            f => self.path.push(f),
        }
    }

    fn tag_push(&mut self, c: char) {
        self.tag.push(c);
    }
}

/// Call-context values of the function under execution, for predicate
/// encoding: parameters by name, `msg.sender`, `block.number`, `len(p)`.
pub(crate) struct CallEnv {
    pub params: BTreeMap<String, Term>,
    pub param_types: BTreeMap<String, Type>,
}

/// Mints the entry-state symbols for a call taking `params` and registers
/// their sorts and ranges.
pub(crate) fn entry_state(params: &[VarDecl], cx: &mut Vcx) -> (SymState, CallEnv) {
    let mut st = SymState {
        scalars: BTreeMap::new(),
        maps: BTreeMap::new(),
        written: BTreeSet::new(),
        locals: BTreeMap::new(),
        local_maps: BTreeMap::new(),
        local_types: BTreeMap::new(),
        scope: String::new(),
        depth: 0,
        path: Vec::new(),
        tag: "p".into(),
        alive: true,
        effects: 0,
    };
    let vars: Vec<(String, Type)> = cx
        .contract
        .state_vars
        .iter()
        .map(|d| (d.name.clone(), d.ty.clone()))
        .collect();
    for (name, ty) in &vars {
        init_state_slot(&mut st, cx, name, ty);
    }

    let mut env = CallEnv { params: BTreeMap::new(), param_types: BTreeMap::new() };
    for p in params {
        env.param_types.insert(p.name.clone(), p.ty.clone());
        st.local_types.insert(p.name.clone(), p.ty.clone());
        match &p.ty {
            Type::Uint | Type::Int => {
                let (lo, hi) = int_range(&p.ty, cx);
                cx.symbols.int_var(&p.name, lo, hi);
                st.locals.insert(p.name.clone(), Term::var(&p.name));
                env.params.insert(p.name.clone(), Term::var(&p.name));
            }
            Type::Bool => {
                cx.symbols.bool_var(&p.name);
                st.locals.insert(p.name.clone(), Term::var(&p.name));
                env.params.insert(p.name.clone(), Term::var(&p.name));
            }
            Type::Address => {
                cx.symbols.addr_var(&p.name);
                st.locals.insert(p.name.clone(), Term::var(&p.name));
                env.params.insert(p.name.clone(), Term::var(&p.name));
            }
            Type::Array(el) if is_scalar(el) => {
                let len = format!("len({})", p.name);
                cx.symbols.int_var(&len, Some(BigInt::ZERO), None);
                cx.symbols.map(&p.name, scalar_sort(el), int_range(el, cx));
                st.locals.insert(len.clone(), Term::var(&len));
                st.local_maps.insert(p.name.clone(), MapTerm::Base(p.name.clone()));
                env.params.insert(len.clone(), Term::var(&len));
            }
            Type::Str | Type::Bytes => {
                let len = format!("len({})", p.name);
                cx.symbols.int_var(&len, Some(BigInt::ZERO), None);
                st.locals.insert(len.clone(), Term::var(&len));
                env.params.insert(len.clone(), Term::var(&len));
            }
            _ => {}
        }
    }
    cx.symbols.addr_var("msg.sender");
    env.params.insert("msg.sender".into(), Term::var("msg.sender"));
    cx.symbols.int_var("block.number", Some(BigInt::ZERO), None);
    env.params.insert("block.number".into(), Term::var("block.number"));
    (st, env)
}

fn init_state_slot(st: &mut SymState, cx: &mut Vcx, name: &str, ty: &Type) {
    match ty {
        Type::Uint | Type::Int => {
            let (lo, hi) = int_range(ty, cx);
            cx.symbols.int_var(name, lo, hi);
            st.scalars.insert(name.into(), Term::var(name));
        }
        Type::Bool => {
            cx.symbols.bool_var(name);
            st.scalars.insert(name.into(), Term::var(name));
        }
        Type::Address => {
            cx.symbols.addr_var(name);
            st.scalars.insert(name.into(), Term::var(name));
        }
        Type::Str | Type::Bytes => {
            init_len_slot(st, cx, name);
        }
        Type::Array(el) => {
            init_len_slot(st, cx, name);
            if is_scalar(el) {
                cx.symbols.map(name, scalar_sort(el), int_range(el, cx));
                st.maps.insert(name.into(), MapTerm::Base(name.into()));
            }
        }
        Type::Mapping(_, v) => {
            init_len_slot(st, cx, name);
            match &**v {
                leaf if is_scalar(leaf) => {
                    cx.symbols.map(name, scalar_sort(leaf), int_range(leaf, cx));
                    st.maps.insert(name.into(), MapTerm::Base(name.into()));
                    if leaf.is_numeric() {
                        let slot = format!("sum({name})");
                        let lo = match leaf {
                            Type::Uint => Some(BigInt::ZERO),
                            _ => None,
                        };
                        cx.symbols.int_var(&slot, lo, None);
                        st.scalars.insert(slot.clone(), Term::var(&slot));
                    }
                }
                Type::Mapping(_, v2) if is_scalar(v2) => {
                    cx.symbols.map(name, scalar_sort(v2), int_range(v2, cx));
                    st.maps.insert(name.into(), MapTerm::Base(name.into()));
                }
                Type::Struct(sname) => {
                    if let Some(sd) = cx.contract.struct_decl(sname).cloned() {
                        for field in &sd.fields {
                            if is_scalar(&field.ty) {
                                let base = format!("{name}.{}", field.name);
                                cx.symbols.map(&base, scalar_sort(&field.ty), int_range(&field.ty, cx));
                                st.maps.insert(base.clone(), MapTerm::Base(base));
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        Type::Struct(sname) => {
            if let Some(sd) = cx.contract.struct_decl(sname).cloned() {
                for field in &sd.fields {
                    init_state_slot(st, cx, &format!("{name}.{}", field.name), &field.ty);
                }
            }
        }
        Type::Unknown => {}
    }
}

fn init_len_slot(st: &mut SymState, cx: &mut Vcx, name: &str) {
    let slot = format!("len({name})");
    cx.symbols.int_var(&slot, Some(BigInt::ZERO), None);
    st.scalars.insert(slot.clone(), Term::var(&slot));
}

fn is_scalar(ty: &Type) -> bool {
    matches!(ty, Type::Uint | Type::Int | Type::Bool | Type::Address)
}

fn scalar_sort(ty: &Type) -> crate::logic::Sort {
    match ty {
        Type::Bool => crate::logic::Sort::Bool,
        Type::Address => crate::logic::Sort::Addr,
        _ => crate::logic::Sort::Int,
    }
}

fn int_range(ty: &Type, cx: &Vcx) -> (Option<BigInt>, Option<BigInt>) {
    match ty {
        Type::Uint => (Some(BigInt::ZERO), Some(cx.config.uint_max())),
        Type::Int => {
            let (lo, hi) = cx.signed_range();
            (Some(lo), Some(hi))
        }
        _ => (None, None),
    }
}

/// Where a path generator ended up after a statement or a body.
pub(crate) enum Flow {
    /// Fell through; execution continues with the next statement.
    Cont(SymState),
    /// Left the function (explicit `return` or end of body).
    Exit(SymState),
    /// Analysis could not continue; executions past this point exist but
    /// are not described.
    Blocked(SymState, String),
}

#[derive(Clone, Copy)]
pub(crate) enum Mode<'m> {
    /// Fork at every branch.
    All,
    /// Follow the single path selected by the given entry assumptions;
    /// branches they do not decide block the run.
    Directed { base: &'m [Formula] },
}

pub(crate) fn exec_function(st: SymState, f: &Function, cx: &mut Vcx, mode: Mode) -> Vec<Flow> {
    exec_stmts(st, &f.body, cx, mode)
        .into_iter()
        .map(|fl| match fl {
            Flow::Cont(s) => Flow::Exit(s),
            other => other,
        })
        .collect()
}

fn exec_stmts(st: SymState, stmts: &[Stmt], cx: &mut Vcx, mode: Mode) -> Vec<Flow> {
    let Some((first, rest)) = stmts.split_first() else {
        return vec![Flow::Cont(st)];
    };
    let mut out = Vec::new();
    for fl in exec_stmt(st, first, cx, mode) {
        match fl {
            Flow::Cont(s) => out.extend(exec_stmts(s, rest, cx, mode)),
            other => out.push(other),
        }
    }
    out
}

fn stop_flow(stop: Stop, st: SymState) -> Vec<Flow> {
    match stop {
        Stop::Blocked(m) => vec![Flow::Blocked(st, m)],
        Stop::Reverted => vec![],
    }
}

fn cont(st: SymState) -> Vec<Flow> {
    if st.alive {
        vec![Flow::Cont(st)]
    } else {
        vec![]
    }
}

fn flow_of(r: ER<()>, st: SymState) -> Vec<Flow> {
    match r {
        Ok(()) => cont(st),
        Err(stop) => stop_flow(stop, st),
    }
}

fn exec_stmt(mut st: SymState, s: &Stmt, cx: &mut Vcx, mode: Mode) -> Vec<Flow> {
    match s {
        Stmt::Local { name, ty, init } => {
            let r = do_local(&mut st, name, ty, init.as_ref(), cx);
            flow_of(r, st)
        }
        Stmt::Assign { target, value } => {
            let r = do_assign(&mut st, target, value, cx);
            flow_of(r, st)
        }
        Stmt::Require(e) => {
            let r = do_require(&mut st, e, cx);
            flow_of(r, st)
        }
        Stmt::Assert(e) => {
            let r = do_assert(&mut st, e, cx);
            flow_of(r, st)
        }
        Stmt::Revert => vec![],
        Stmt::Return(opt) => {
            if let Some(e) = opt {
                if let Err(stop) = eval(&mut st, e, cx, false) {
                    return stop_flow(stop, st);
                }
            }
            if st.alive {
                vec![Flow::Exit(st)]
            } else {
                vec![]
            }
        }
        Stmt::Call { callee, args } => match inline_call(&mut st, callee, args, cx) {
            Ok(_) => cont(st),
            Err(stop) => stop_flow(stop, st),
        },
        Stmt::If { cond, then_branch, else_branch } => {
            let phi = match eval_bool(&mut st, cond, cx) {
                Ok(f) => f,
                Err(stop) => return stop_flow(stop, st),
            };
            match mode {
                Mode::All => {
                    let mut out = Vec::new();
                    let mut st_t = st.clone();
                    st_t.tag_push('T');
                    st_t.assume(phi.clone());
                    if st_t.alive {
                        out.extend(exec_stmts(st_t, then_branch, cx, mode));
                    }
                    let mut st_e = st;
                    st_e.tag_push('F');
                    st_e.assume(Formula::not(phi));
                    if st_e.alive {
                        out.extend(exec_stmts(st_e, else_branch, cx, mode));
                    }
                    out
                }
                Mode::Directed { base } => match decide(&st, &phi, base, cx) {
                    Some(true) => {
                        st.tag_push('T');
                        st.assume(phi);
                        exec_stmts(st, then_branch, cx, mode)
                    }
                    Some(false) => {
                        st.tag_push('F');
                        st.assume(Formula::not(phi));
                        exec_stmts(st, else_branch, cx, mode)
                    }
                    None => vec![Flow::Blocked(
                        st,
                        "premise-contingent: the premise does not decide a branch".into(),
                    )],
                },
            }
        }
        Stmt::For { init, cond, update, body } => {
            if let Err(stop) = do_simple_stmt(&mut st, init, cx) {
                return stop_flow(stop, st);
            }
            if !st.alive {
                return vec![];
            }
            exec_loop(st, cond, update, body, cx, mode)
        }
    }
}

fn exec_loop(
    st: SymState,
    cond: &Expr,
    update: &Stmt,
    body: &[Stmt],
    cx: &mut Vcx,
    mode: Mode,
) -> Vec<Flow> {
    let unroll = cx.config.unroll;
    let mut out = Vec::new();
    let mut live = vec![st];
    for round in 0..=unroll {
        let mut next = Vec::new();
        for mut s0 in live {
            let phi = match eval_bool(&mut s0, cond, cx) {
                Ok(f) => f,
                Err(stop) => {
                    out.extend(stop_flow(stop, s0));
                    continue;
                }
            };
            let choice = match mode {
                Mode::All => None,
                Mode::Directed { base } => match decide(&s0, &phi, base, cx) {
                    Some(c) => Some(c),
                    None => {
                        out.push(Flow::Blocked(
                            s0,
                            "premise-contingent: the premise does not decide a loop condition"
                                .into(),
                        ));
                        continue;
                    }
                },
            };
            if choice != Some(true) {
                let mut s_exit = s0.clone();
                s_exit.tag_push('X');
                s_exit.assume(Formula::not(phi.clone()));
                if s_exit.alive {
                    out.push(Flow::Cont(s_exit));
                }
            }
            if choice == Some(false) {
                continue;
            }
            let mut s_in = s0;
            s_in.tag_push('L');
            s_in.assume(phi);
            if !s_in.alive {
                continue;
            }
            if round == unroll {
                out.push(Flow::Blocked(
                    s_in,
                    format!("loop-bound: `for` still live after {unroll} unrollings"),
                ));
                continue;
            }
            for fl in exec_stmts(s_in, body, cx, mode) {
                match fl {
                    Flow::Cont(mut sb) => match do_simple_stmt(&mut sb, update, cx) {
                        Ok(()) if sb.alive => next.push(sb),
                        Ok(()) => {}
                        Err(stop) => out.extend(stop_flow(stop, sb)),
                    },
                    other => out.push(other),
                }
            }
        }
        live = next;
        if live.is_empty() {
            break;
        }
    }
    out
}

/// Loop headers allow only declarations and assignments.
fn do_simple_stmt(st: &mut SymState, s: &Stmt, cx: &mut Vcx) -> ER<()> {
    match s {
        Stmt::Local { name, ty, init } => do_local(st, name, ty, init.as_ref(), cx),
        Stmt::Assign { target, value } => do_assign(st, target, value, cx),
        _ => blocked("unsupported loop header statement"),
    }
}

/// Tests whether the base assumptions and the path decide `phi`. Probe
/// queries never leave this module, so the candidate id is a placeholder.
fn decide(st: &SymState, phi: &Formula, base: &[Formula], cx: &Vcx) -> Option<bool> {
    let try_prove = |ob: Formula| {
        let mut assumptions: Vec<Formula> = base.to_vec();
        assumptions.extend(st.path.iter().cloned());
        let refs: Vec<&Formula> = assumptions.iter().chain(std::iter::once(&ob)).collect();
        let mut fs = cx.symbols.bounds(&refs);
        fs.extend(assumptions);
        let q = VerificationQuery {
            function: String::new(),
            path: st.tag.clone(),
            vars: cx.symbols.vars.clone(),
            maps: cx.symbols.maps.clone(),
            assumptions: fs,
            obligation: ob,
            source: ObligationSource::Candidate(usize::MAX),
            blocked: None,
        };
        discharge(&q, cx.config).is_proved()
    };
    if try_prove(phi.clone()) {
        Some(true)
    } else if try_prove(Formula::not(phi.clone())) {
        Some(false)
    } else {
        None
    }
}

fn do_require(st: &mut SymState, e: &Expr, cx: &mut Vcx) -> ER<()> {
    let phi = eval_bool(st, e, cx)?;
    st.assume(phi);
    Ok(())
}

fn do_assert(st: &mut SymState, e: &Expr, cx: &mut Vcx) -> ER<()> {
    let phi = eval_bool(st, e, cx)?;
    if cx.collect_asserts && st.alive {
        cx.asserts.push(AssertSite {
            label: format!("assert@{}:{}", e.span.line, e.span.col),
            tag: st.tag.clone(),
            path: st.path.clone(),
            check: phi.clone(),
        });
    }
    // A failing assert aborts rather than reverts, but along any path that
    // continues the condition held.
    st.assume(phi);
    Ok(())
}

fn do_local(st: &mut SymState, name: &str, ty: &Type, init: Option<&Expr>, cx: &mut Vcx) -> ER<()> {
    let key = st.local_key(name);
    match ty {
        Type::Uint | Type::Int | Type::Bool | Type::Address => {
            let val = match init {
                Some(e) => eval(st, e, cx, false)?,
                None => match ty {
                    Type::Bool => Term::Bool(false),
                    Type::Address => Term::Addr(0),
                    _ => Term::int(0),
                },
            };
            st.locals.insert(key.clone(), val);
        }
        Type::Str | Type::Bytes => {
            let len = match init {
                Some(e) => string_len_term(st, e)?,
                None => Term::int(0),
            };
            st.locals.insert(format!("len({key})"), len);
        }
        Type::Array(el) if is_scalar(el) => {
            if init.is_some() {
                return blocked("array initializer");
            }
            // Freshly declared arrays are empty: every read's bound check
            // is unsatisfiable until the fragment grows a push operation.
            let base = format!("arr%{}", cx.fresh);
            cx.fresh += 1;
            cx.symbols.map(&base, scalar_sort(el), int_range(el, cx));
            st.local_maps.insert(key.clone(), MapTerm::Base(base));
            st.locals.insert(format!("len({key})"), Term::int(0));
        }
        _ => return blocked(format!("local of type `{ty}`")),
    }
    st.local_types.insert(key, ty.clone());
    st.effects += 1;
    Ok(())
}

fn do_assign(st: &mut SymState, target: &LValue, value: &Expr, cx: &mut Vcx) -> ER<()> {
    if target.accessors.is_empty() {
        let lk = st.local_key(&target.base);
        let declared = st
            .local_types
            .get(&lk)
            .cloned()
            .or_else(|| cx.contract.state_var(&target.base).map(|d| d.ty.clone()));
        match declared {
            Some(Type::Str | Type::Bytes) => {
                let len = string_len_term(st, value)?;
                let local = st.local_types.contains_key(&lk);
                let slot = format!("len({})", if local { lk.clone() } else { target.base.clone() });
                if local {
                    st.locals.insert(slot, len);
                } else {
                    st.scalars.insert(slot, len);
                }
                st.effects += 1;
                return Ok(());
            }
            Some(Type::Mapping(..) | Type::Struct(_) | Type::Array(_)) => {
                return blocked("whole-aggregate assignment");
            }
            _ => {}
        }
    }
    let val = eval(st, value, cx, false)?;
    let steps: Vec<EStep> = target
        .accessors
        .iter()
        .map(|a| match a {
            Accessor::Index(e) => EStep::Key(e),
            Accessor::Member(f) => EStep::Field(f),
        })
        .collect();
    let place = resolve_place(st, &target.base, &steps, cx, false)?;
    write_place(st, place, val);
    Ok(())
}

/// Length of the string/bytes value an expression denotes. Only literals
/// and variables keep a tracked length.
fn string_len_term(st: &SymState, e: &Expr) -> ER<Term> {
    match &e.kind {
        ExprKind::Str(s) => Ok(Term::int(s.len() as i64)),
        ExprKind::Var(name) => {
            let lk = st.local_key(name);
            if let Some(t) = st.locals.get(&format!("len({lk})")) {
                return Ok(t.clone());
            }
            st.scalars
                .get(&format!("len({name})"))
                .cloned()
                .ok_or_else(|| Stop::Blocked(format!("no tracked length for `{name}`")))
        }
        _ => blocked("string expression"),
    }
}

enum EStep<'e> {
    Key(&'e Expr),
    Field(&'e str),
}

/// Peels `Index`/`Member` selectors down to the root variable.
fn split_expr(e: &Expr) -> Option<(&str, Vec<EStep<'_>>)> {
    let mut steps = Vec::new();
    let mut cur = e;
    loop {
        match &cur.kind {
            ExprKind::Index(b, k) => {
                steps.push(EStep::Key(k));
                cur = b;
            }
            ExprKind::Member(b, f) => {
                steps.push(EStep::Field(f));
                cur = b;
            }
            ExprKind::Var(name) => {
                steps.reverse();
                return Some((name, steps));
            }
            _ => return None,
        }
    }
}

enum Place {
    LocalSlot(String),
    StateSlot(String),
    LocalCell { base: String, keys: Vec<Term> },
    StateCell { base: String, keys: Vec<Term> },
}

fn resolve_place(
    st: &mut SymState,
    base: &str,
    steps: &[EStep],
    cx: &mut Vcx,
    wrap: bool,
) -> ER<Place> {
    let lk = st.local_key(base);
    if let Some(lty) = st.local_types.get(&lk).cloned() {
        return match (&lty, steps) {
            (t, []) if is_scalar(t) => Ok(Place::LocalSlot(lk)),
            (Type::Array(_), [EStep::Key(k)]) => {
                let idx = eval(st, k, cx, wrap)?;
                let len = st
                    .locals
                    .get(&format!("len({lk})"))
                    .cloned()
                    .ok_or_else(|| Stop::Blocked(format!("no tracked length for `{base}`")))?;
                st.assume(Formula::cmp(CmpOp::Ge, idx.clone(), Term::int(0)));
                st.assume(Formula::cmp(CmpOp::Lt, idx.clone(), len));
                Ok(Place::LocalCell { base: lk, keys: vec![idx] })
            }
            _ => blocked(format!("unsupported access to `{base}`")),
        };
    }
    let decl = cx
        .contract
        .state_var(base)
        .ok_or_else(|| Stop::Blocked(format!("unknown variable `{base}`")))?;
    let mut ty = decl.ty.clone();
    let mut b = base.to_string();
    let mut keys = Vec::new();
    for step in steps {
        match (&ty, step) {
            (Type::Mapping(_, v), EStep::Key(k)) => {
                let next = (**v).clone();
                keys.push(eval(st, k, cx, wrap)?);
                ty = next;
            }
            (Type::Array(el), EStep::Key(k)) => {
                let next = (**el).clone();
                let idx = eval(st, k, cx, wrap)?;
                let len = st
                    .scalars
                    .get(&format!("len({b})"))
                    .cloned()
                    .ok_or_else(|| Stop::Blocked(format!("no tracked length for `{b}`")))?;
                st.assume(Formula::cmp(CmpOp::Ge, idx.clone(), Term::int(0)));
                st.assume(Formula::cmp(CmpOp::Lt, idx.clone(), len));
                keys.push(idx);
                ty = next;
            }
            (Type::Struct(sname), EStep::Field(f)) => {
                let fty = cx
                    .contract
                    .struct_decl(sname)
                    .and_then(|sd| sd.fields.iter().find(|fd| fd.name == *f))
                    .map(|fd| fd.ty.clone())
                    .ok_or_else(|| Stop::Blocked(format!("`{sname}` has no field `{f}`")))?;
                b = format!("{b}.{f}");
                ty = fty;
            }
            _ => return blocked(format!("selector does not match the type of `{b}`")),
        }
    }
    if !is_scalar(&ty) {
        return blocked(format!("access to `{b}` is not scalar-valued"));
    }
    if keys.is_empty() {
        Ok(Place::StateSlot(b))
    } else {
        Ok(Place::StateCell { base: b, keys })
    }
}

fn read_place(st: &SymState, place: &Place) -> ER<Term> {
    match place {
        Place::LocalSlot(k) => st
            .locals
            .get(k)
            .cloned()
            .ok_or_else(|| Stop::Blocked(format!("`{k}` has no value"))),
        Place::StateSlot(k) => st
            .scalars
            .get(k)
            .cloned()
            .ok_or_else(|| Stop::Blocked(format!("`{k}` has no scalar encoding"))),
        Place::LocalCell { base, keys } => {
            let m = st
                .local_maps
                .get(base)
                .cloned()
                .ok_or_else(|| Stop::Blocked(format!("`{base}` has no mapping encoding")))?;
            Ok(Term::Select(m, keys.clone()))
        }
        Place::StateCell { base, keys } => {
            let m = st
                .maps
                .get(base)
                .cloned()
                .ok_or_else(|| Stop::Blocked(format!("`{base}` has no mapping encoding")))?;
            Ok(Term::Select(m, keys.clone()))
        }
    }
}

fn write_place(st: &mut SymState, place: Place, val: Term) {
    st.effects += 1;
    match place {
        Place::LocalSlot(k) => {
            st.locals.insert(k, val);
        }
        Place::StateSlot(k) => {
            st.scalars.insert(k, val);
        }
        Place::LocalCell { base, keys } => {
            if let Some(m) = st.local_maps.get(&base).cloned() {
                st.local_maps.insert(base, MapTerm::Store(Box::new(m), keys, Box::new(val)));
            }
        }
        Place::StateCell { base, keys } => {
            let Some(m) = st.maps.get(&base).cloned() else { return };
            let sum_slot = format!("sum({base})");
            if keys.len() == 1 {
                if let Some(sum) = st.scalars.get(&sum_slot).cloned() {
                    let old = Term::Select(m.clone(), keys.clone());
                    st.scalars
                        .insert(sum_slot, Term::add(Term::sub(sum, old), val.clone()));
                }
            }
            st.maps
                .insert(base.clone(), MapTerm::Store(Box::new(m), keys, Box::new(val)));
            st.written.insert(base);
        }
    }
}

fn cmp_of(op: BinOp) -> CmpOp {
    match op {
        BinOp::Lt => CmpOp::Lt,
        BinOp::Gt => CmpOp::Gt,
        BinOp::Le => CmpOp::Le,
        BinOp::Ge => CmpOp::Ge,
        BinOp::Eq => CmpOp::Eq,
        BinOp::Ne => CmpOp::Ne,
        _ => unreachable!("not a comparison"),
    }
}

fn holds(t: Term) -> Formula {
    match t {
        Term::Bool(true) => Formula::True,
        Term::Bool(false) => Formula::False,
        t => Formula::Holds(t),
    }
}

fn eval_bool(st: &mut SymState, e: &Expr, cx: &mut Vcx) -> ER<Formula> {
    match &e.kind {
        ExprKind::Bool(b) => Ok(if *b { Formula::True } else { Formula::False }),
        ExprKind::Unary(UnOp::Not, x) => Ok(Formula::not(eval_bool(st, x, cx)?)),
        ExprKind::Binary(op @ (BinOp::And | BinOp::Or), a, b) => {
            let fa = eval_bool(st, a, cx)?;
            // The right operand only runs when the left decides nothing,
            // so its revert conditions and writes must not leak onto the
            // unconditional path.
            let snap = (st.effects, cx.fresh);
            let fb = eval_bool(st, b, cx)?;
            if snap != (st.effects, cx.fresh) {
                return blocked("effectful right operand of a short-circuit operator");
            }
            Ok(match op {
                BinOp::And => Formula::and(vec![fa, fb]),
                _ => Formula::or(vec![fa, fb]),
            })
        }
        ExprKind::Binary(op, a, b) if op.is_comparison() || op.is_equality() => {
            if matches!(a.ty, Type::Str | Type::Bytes) {
                return blocked("string comparison");
            }
            let ta = eval(st, a, cx, false)?;
            let tb = eval(st, b, cx, false)?;
            Ok(Formula::cmp(cmp_of(*op), ta, tb))
        }
        _ => {
            let t = eval(st, e, cx, false)?;
            Ok(holds(t))
        }
    }
}

fn eval(st: &mut SymState, e: &Expr, cx: &mut Vcx, wrap: bool) -> ER<Term> {
    match &e.kind {
        ExprKind::Number(n) => Ok(Term::Int(BigInt::from(n.clone()))),
        ExprKind::Bool(b) => Ok(Term::Bool(*b)),
        ExprKind::Str(_) => blocked("string value outside the integer fragment"),
        ExprKind::AddrLit(k) => Ok(Term::Addr(*k)),
        ExprKind::MsgSender => Ok(Term::var("msg.sender")),
        ExprKind::BlockNumber => Ok(Term::var("block.number")),
        ExprKind::Var(name) => {
            let lk = st.local_key(name);
            if let Some(t) = st.locals.get(&lk) {
                return Ok(t.clone());
            }
            st.scalars
                .get(name.as_str())
                .cloned()
                .ok_or_else(|| Stop::Blocked(format!("`{name}` has no scalar value")))
        }
        ExprKind::Index(..) | ExprKind::Member(..) => {
            let Some((base, steps)) = split_expr(e) else {
                return blocked("selector applied to a non-variable");
            };
            let place = resolve_place(st, base, &steps, cx, wrap)?;
            read_place(st, &place)
        }
        ExprKind::Length(inner) => {
            let ExprKind::Var(name) = &inner.kind else {
                return blocked("`.length` of a nested value");
            };
            let lk = st.local_key(name);
            if let Some(t) = st.locals.get(&format!("len({lk})")) {
                return Ok(t.clone());
            }
            st.scalars
                .get(&format!("len({name})"))
                .cloned()
                .ok_or_else(|| Stop::Blocked(format!("no tracked length for `{name}`")))
        }
        ExprKind::Unary(UnOp::Not, _) => bridge_bool(st, e, cx),
        ExprKind::Binary(op, a, b) if op.is_arithmetic() => arith(st, cx, *op, e, a, b, wrap),
        ExprKind::Binary(..) => bridge_bool(st, e, cx),
        ExprKind::Unchecked(inner) => eval(st, inner, cx, true),
        ExprKind::Call { callee, args } => {
            let ret = inline_call(st, callee, args, cx)?;
            ret.ok_or_else(|| Stop::Blocked(format!("`{callee}` returns no value")))
        }
    }
}

/// A boolean expression in value position becomes a fresh bool symbol tied
/// to its formula, so stores and equalities can mention it.
fn bridge_bool(st: &mut SymState, e: &Expr, cx: &mut Vcx) -> ER<Term> {
    let phi = eval_bool(st, e, cx)?;
    Ok(match phi {
        Formula::True => Term::Bool(true),
        Formula::False => Term::Bool(false),
        Formula::Holds(t) => t,
        phi => {
            let b = cx.fresh_bool();
            let h = Formula::Holds(b.clone());
            st.assume(Formula::or(vec![
                Formula::and(vec![h.clone(), phi.clone()]),
                Formula::and(vec![Formula::not(h), Formula::not(phi)]),
            ]));
            b
        }
    })
}

fn arith(
    st: &mut SymState,
    cx: &mut Vcx,
    op: BinOp,
    e: &Expr,
    a: &Expr,
    b: &Expr,
    wrap: bool,
) -> ER<Term> {
    let ta = eval(st, a, cx, wrap)?;
    let tb = eval(st, b, cx, wrap)?;
    let signed = matches!(e.ty, Type::Int);
    if signed && wrap {
        return blocked("unchecked signed arithmetic");
    }
    let max = cx.config.uint_max();
    if wrap {
        return wrap_arith(st, cx, op, ta, tb, &max);
    }
    let (lo, hi) = if signed {
        cx.signed_range()
    } else {
        (BigInt::ZERO, max)
    };
    match op {
        BinOp::Add | BinOp::Sub | BinOp::Mul => {
            let r = match op {
                BinOp::Add => Term::add(ta, tb),
                BinOp::Sub => {
                    if !signed {
                        // Checked uint subtraction reverts on underflow.
                        st.assume(Formula::cmp(CmpOp::Le, tb.clone(), ta.clone()));
                    }
                    Term::sub(ta, tb)
                }
                _ => Term::mul(ta, tb),
            };
            // The product of two uints is nonnegative, which the linear
            // backend cannot derive on its own.
            if signed || op == BinOp::Mul {
                st.assume(Formula::cmp(CmpOp::Ge, r.clone(), Term::Int(lo)));
            }
            st.assume(Formula::cmp(CmpOp::Le, r.clone(), Term::Int(hi)));
            Ok(r)
        }
        BinOp::Div => {
            if signed {
                return blocked("signed division");
            }
            let Term::Int(c) = tb else {
                return blocked("division by a symbolic divisor");
            };
            if c == BigInt::ZERO {
                return Err(Stop::Reverted);
            }
            // q = ta / c via the flooring characterization, which for
            // nonnegative operands matches truncation.
            let q = cx.fresh_int("div", Some(BigInt::ZERO), Some(hi));
            st.assume(Formula::cmp(
                CmpOp::Le,
                Term::mul(Term::Int(c.clone()), q.clone()),
                ta.clone(),
            ));
            st.assume(Formula::cmp(
                CmpOp::Le,
                ta,
                Term::add(Term::mul(Term::Int(c.clone()), q.clone()), Term::Int(c - 1)),
            ));
            Ok(q)
        }
        _ => unreachable!("not arithmetic"),
    }
}

fn wrap_arith(
    st: &mut SymState,
    cx: &mut Vcx,
    op: BinOp,
    ta: Term,
    tb: Term,
    max: &BigInt,
) -> ER<Term> {
    let word = Term::Int(max + 1);
    match op {
        BinOp::Add | BinOp::Sub => {
            let u = cx.fresh_int("wrap", Some(BigInt::ZERO), Some(max.clone()));
            let k = cx.fresh_int("ovf", Some(BigInt::ZERO), Some(BigInt::one()));
            let exact = match op {
                BinOp::Add => Term::sub(Term::add(ta, tb), Term::mul(word, k)),
                _ => Term::add(Term::sub(ta, tb), Term::mul(word, k)),
            };
            st.assume(Formula::cmp(CmpOp::Eq, u.clone(), exact));
            Ok(u)
        }
        BinOp::Mul => {
            let u = cx.fresh_int("wrap", Some(BigInt::ZERO), Some(max.clone()));
            let k = cx.fresh_int("ovf", Some(BigInt::ZERO), None);
            st.assume(Formula::cmp(
                CmpOp::Eq,
                u.clone(),
                Term::sub(Term::mul(ta, tb), Term::mul(word, k)),
            ));
            Ok(u)
        }
        BinOp::Div => {
            let Term::Int(c) = tb else {
                return blocked("division by a symbolic divisor");
            };
            if c == BigInt::ZERO {
                return Err(Stop::Reverted);
            }
            let q = cx.fresh_int("div", Some(BigInt::ZERO), Some(max.clone()));
            st.assume(Formula::cmp(
                CmpOp::Le,
                Term::mul(Term::Int(c.clone()), q.clone()),
                ta.clone(),
            ));
            st.assume(Formula::cmp(
                CmpOp::Le,
                ta,
                Term::add(Term::mul(Term::Int(c.clone()), q.clone()), Term::Int(c - 1)),
            ));
            Ok(q)
        }
        _ => unreachable!("not arithmetic"),
    }
}

fn is_straight_line(body: &[Stmt]) -> bool {
    body.iter()
        .all(|s| !matches!(s, Stmt::If { .. } | Stmt::For { .. }))
}

enum BindVal {
    Scalar(Term),
    Seq { map: Option<MapTerm>, len: Term },
}

fn inline_call(st: &mut SymState, callee: &str, args: &[Expr], cx: &mut Vcx) -> ER<Option<Term>> {
    if st.depth >= CALL_DEPTH_LIMIT {
        return blocked("call depth limit");
    }
    let Some(f) = cx.contract.function(callee) else {
        return blocked(format!("unknown function `{callee}`"));
    };
    if !is_straight_line(&f.body) {
        return blocked("internal call with a branching body");
    }
    let f = f.clone();
    let mut binds = Vec::new();
    for (p, a) in f.params.iter().zip(args) {
        let bv = match &p.ty {
            t if is_scalar(t) => BindVal::Scalar(eval(st, a, cx, false)?),
            Type::Array(_) => {
                let ExprKind::Var(name) = &a.kind else {
                    return blocked("array argument expression");
                };
                let lk = st.local_key(name);
                if let Some(m) = st.local_maps.get(&lk) {
                    let len = st.locals[&format!("len({lk})")].clone();
                    BindVal::Seq { map: Some(m.clone()), len }
                } else if let Some(m) = st.maps.get(name.as_str()) {
                    let len = st.scalars[&format!("len({name})")].clone();
                    BindVal::Seq { map: Some(m.clone()), len }
                } else {
                    return blocked(format!("`{name}` has no mapping encoding"));
                }
            }
            Type::Str | Type::Bytes => BindVal::Seq { map: None, len: string_len_term(st, a)? },
            t => return blocked(format!("argument of type `{t}`")),
        };
        binds.push(bv);
    }
    let saved_scope = std::mem::replace(&mut st.scope, format!("{callee}%{}%", st.depth + 1));
    st.depth += 1;
    for (p, bv) in f.params.iter().zip(binds) {
        let key = st.local_key(&p.name);
        st.local_types.insert(key.clone(), p.ty.clone());
        match bv {
            BindVal::Scalar(t) => {
                st.locals.insert(key, t);
            }
            BindVal::Seq { map, len } => {
                st.locals.insert(format!("len({key})"), len);
                if let Some(m) = map {
                    st.local_maps.insert(key, m);
                }
            }
        }
    }
    let result = exec_straight(st, &f.body, cx);
    st.depth -= 1;
    st.scope = saved_scope;
    result
}

fn exec_straight(st: &mut SymState, body: &[Stmt], cx: &mut Vcx) -> ER<Option<Term>> {
    for s in body {
        match s {
            Stmt::Local { name, ty, init } => do_local(st, name, ty, init.as_ref(), cx)?,
            Stmt::Assign { target, value } => do_assign(st, target, value, cx)?,
            Stmt::Require(e) => do_require(st, e, cx)?,
            Stmt::Assert(e) => do_assert(st, e, cx)?,
            Stmt::Revert => return Err(Stop::Reverted),
            Stmt::Call { callee, args } => {
                inline_call(st, callee, args, cx)?;
            }
            Stmt::Return(None) => return Ok(None),
            Stmt::Return(Some(e)) => return Ok(Some(eval(st, e, cx, false)?)),
            Stmt::If { .. } | Stmt::For { .. } => unreachable!("checked straight-line"),
        }
        if !st.alive {
            // The path condition became unsatisfiable; no execution
            // continues from here.
            return Err(Stop::Reverted);
        }
    }
    Ok(None)
}
