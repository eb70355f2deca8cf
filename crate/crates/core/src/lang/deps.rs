//! Per-function variable dependence relation.
//!
//! Two names are related in a function when they participate in a shared
//! data or control flow into some state-variable update: assignment sources
//! and index expressions flow into the target, branch conditions flow into
//! everything written under them, and a branch that can `return` early makes
//! the statements after it control-dependent on its condition. The relation
//! is symmetric, reflexive on the function's name universe, and closed under
//! transitive flows through locals and internal calls.
//!
//! `require`/`assert`/`revert` do not contribute control edges: a failed
//! guard aborts the whole call, so it cannot shape the state seen in
//! successful executions.

use super::ast::*;
use std::collections::{BTreeMap, BTreeSet};

type NameSet = BTreeSet<String>;

/// Call-site-independent behavior of one function. Parameter positions are
/// encoded as `#0`, `#1`, ... so callers can substitute argument sources.
#[derive(Debug, Default, Clone)]
struct FnSummary {
    /// State variable -> names flowing into its updates.
    state_writes: BTreeMap<String, NameSet>,
    /// Names flowing into returned values.
    return_sources: NameSet,
}

#[derive(Debug, Clone)]
pub struct DependenceRelation {
    universes: BTreeMap<String, NameSet>,
    pairs: BTreeMap<String, BTreeSet<(String, String)>>,
}

impl DependenceRelation {
    pub fn compute(contract: &Contract) -> Self {
        let mut summaries: BTreeMap<String, FnSummary> = BTreeMap::new();
        for f in call_order(contract) {
            let summary = analyze(f, &summaries);
            summaries.insert(f.name.clone(), summary);
        }

        let state_names: NameSet = contract.state_vars.iter().map(|v| v.name.clone()).collect();
        let mut universes = BTreeMap::new();
        let mut pairs = BTreeMap::new();
        for f in &contract.functions {
            let mut universe = state_names.clone();
            universe.insert("msg.sender".to_string());
            universe.insert("block.number".to_string());
            for p in &f.params {
                universe.insert(p.name.clone());
            }

            let summary = &summaries[&f.name];
            let mut fn_pairs = BTreeSet::new();
            for (target, sources) in &summary.state_writes {
                // Substitute '#i' placeholders back to this function's own
                // parameter names.
                let mut cluster: NameSet = sources
                    .iter()
                    .map(|s| resolve_placeholder(s, &f.params))
                    .collect();
                cluster.insert(target.clone());
                let members: Vec<&String> =
                    cluster.iter().filter(|n| universe.contains(*n)).collect();
                for (i, a) in members.iter().enumerate() {
                    for b in members.iter().skip(i + 1) {
                        fn_pairs.insert(norm_pair(a, b));
                    }
                }
            }
            pairs.insert(f.name.clone(), fn_pairs);
            universes.insert(f.name.clone(), universe);
        }
        DependenceRelation { universes, pairs }
    }

    /// Symmetric, reflexive-on-universe dependence query.
    pub fn related(&self, function: &str, a: &str, b: &str) -> bool {
        let Some(universe) = self.universes.get(function) else {
            return false;
        };
        if a == b {
            return universe.contains(a);
        }
        self.pairs
            .get(function)
            .is_some_and(|p| p.contains(&norm_pair(a, b)))
    }

    pub fn pairs(&self, function: &str) -> impl Iterator<Item = &(String, String)> {
        self.pairs.get(function).into_iter().flatten()
    }
}

fn norm_pair(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

fn resolve_placeholder(name: &str, params: &[VarDecl]) -> String {
    if let Some(rest) = name.strip_prefix('#') {
        if let Ok(i) = rest.parse::<usize>() {
            if let Some(p) = params.get(i) {
                return p.name.clone();
            }
        }
    }
    name.to_string()
}

/// Functions ordered callees-first; the type checker guarantees acyclicity.
fn call_order(contract: &Contract) -> Vec<&Function> {
    let mut order: Vec<&Function> = Vec::new();
    let mut placed: BTreeSet<&str> = BTreeSet::new();
    let all: Vec<&Function> = contract.functions.iter().collect();
    while order.len() < all.len() {
        let before = order.len();
        for f in &all {
            if placed.contains(f.name.as_str()) {
                continue;
            }
            let mut callees = BTreeSet::new();
            collect_callees(&f.body, &mut callees);
            let ready = callees
                .iter()
                .all(|c| placed.contains(c.as_str()) || !all.iter().any(|g| g.name == *c));
            if ready {
                placed.insert(f.name.as_str());
                order.push(f);
            }
        }
        assert!(order.len() > before, "call graph is acyclic after type checking");
    }
    order
}

fn collect_callees(stmts: &[Stmt], out: &mut BTreeSet<String>) {
    for s in stmts {
        match s {
            Stmt::Call { callee, .. } => {
                out.insert(callee.clone());
            }
            Stmt::If {
                then_branch,
                else_branch,
                ..
            } => {
                collect_callees(then_branch, out);
                collect_callees(else_branch, out);
            }
            Stmt::For { body, .. } => collect_callees(body, out),
            _ => {}
        }
    }
}

struct Analyzer<'a> {
    summaries: &'a BTreeMap<String, FnSummary>,
    /// Direct influence edges: name -> source names.
    inf: BTreeMap<String, NameSet>,
    return_sources: NameSet,
    written_state: NameSet,
    locals: NameSet,
    param_index: BTreeMap<String, usize>,
}

fn analyze(f: &Function, summaries: &BTreeMap<String, FnSummary>) -> FnSummary {
    let mut a = Analyzer {
        summaries,
        inf: BTreeMap::new(),
        return_sources: NameSet::new(),
        written_state: NameSet::new(),
        locals: NameSet::new(),
        param_index: f
            .params
            .iter()
            .enumerate()
            .map(|(i, p)| (p.name.clone(), i))
            .collect(),
    };
    a.walk(&f.body, &NameSet::new());

    // Transitive closure over influence edges.
    loop {
        let mut changed = false;
        let names: Vec<String> = a.inf.keys().cloned().collect();
        for n in names {
            let sources = a.inf[&n].clone();
            let mut extended = sources.clone();
            for s in &sources {
                if let Some(more) = a.inf.get(s) {
                    extended.extend(more.iter().cloned());
                }
            }
            if extended.len() > a.inf[&n].len() {
                a.inf.insert(n, extended);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let to_placeholder = |n: &String| -> String {
        match a.param_index.get(n) {
            Some(i) => format!("#{i}"),
            None => n.clone(),
        }
    };
    let mut state_writes = BTreeMap::new();
    for s in &a.written_state {
        let sources = a
            .inf
            .get(s)
            .map(|set| set.iter().map(to_placeholder).collect())
            .unwrap_or_default();
        state_writes.insert(s.clone(), sources);
    }
    FnSummary {
        state_writes,
        return_sources: a.return_sources.iter().map(to_placeholder).collect(),
    }
}

impl<'a> Analyzer<'a> {
    fn add_edges(&mut self, target: &str, sources: &NameSet) {
        self.inf
            .entry(target.to_string())
            .or_default()
            .extend(sources.iter().cloned());
    }

    fn walk(&mut self, stmts: &[Stmt], guards: &NameSet) {
        let mut guards = guards.clone();
        for s in stmts {
            match s {
                Stmt::Local { name, init, .. } => {
                    self.locals.insert(name.clone());
                    let mut sources = guards.clone();
                    if let Some(e) = init {
                        self.expr_sources(e, &mut sources, &guards);
                    }
                    self.add_edges(name, &sources);
                }
                Stmt::Assign { target, value } => {
                    let mut sources = guards.clone();
                    self.expr_sources(value, &mut sources, &guards);
                    for acc in &target.accessors {
                        if let Accessor::Index(i) = acc {
                            self.expr_sources(i, &mut sources, &guards);
                        }
                    }
                    self.add_edges(&target.base, &sources);
                    if !self.param_index.contains_key(&target.base)
                        && !self.locals.contains(&target.base)
                    {
                        self.note_state_write(&target.base);
                    }
                }
                Stmt::If {
                    cond,
                    then_branch,
                    else_branch,
                } => {
                    let mut inner = guards.clone();
                    self.expr_sources(cond, &mut inner, &guards);
                    self.walk(then_branch, &inner);
                    self.walk(else_branch, &inner);
                    let mut exits = NameSet::new();
                    let mut may_return = false;
                    return_guard_vars(then_branch, &mut exits, &mut may_return);
                    return_guard_vars(else_branch, &mut exits, &mut may_return);
                    if may_return {
                        expr_vars(cond, &mut guards);
                        guards.extend(exits);
                    }
                }
                Stmt::For {
                    init,
                    cond,
                    update,
                    body,
                } => {
                    self.walk(std::slice::from_ref(init), &guards);
                    let mut inner = guards.clone();
                    self.expr_sources(cond, &mut inner, &guards);
                    self.walk(std::slice::from_ref(update), &inner);
                    self.walk(body, &inner);
                    let mut exits = NameSet::new();
                    let mut may_return = false;
                    return_guard_vars(body, &mut exits, &mut may_return);
                    if may_return {
                        expr_vars(cond, &mut guards);
                        guards.extend(exits);
                    }
                }
                Stmt::Require(_) | Stmt::Assert(_) | Stmt::Revert => {}
                Stmt::Return(value) => {
                    let mut sources = guards.clone();
                    if let Some(e) = value {
                        self.expr_sources(e, &mut sources, &guards);
                    }
                    self.return_sources.extend(sources);
                }
                Stmt::Call { callee, args } => {
                    self.apply_call(callee, args, &guards);
                }
            }
        }
    }

    /// Like [`expr_vars`] but resolves internal calls through summaries:
    /// the call value carries the callee's return sources, and the callee's
    /// state writes take effect at the call site.
    fn expr_sources(&mut self, e: &Expr, out: &mut NameSet, guards: &NameSet) {
        match &e.kind {
            ExprKind::Call { callee, args } => {
                for a in args {
                    self.expr_sources(a, out, guards);
                }
                if let Some(summary) = self.summaries.get(callee).cloned() {
                    substitute_placeholders(&summary.return_sources, args, out);
                    self.apply_call(callee, args, guards);
                }
            }
            ExprKind::Index(c, i) => {
                self.expr_sources(c, out, guards);
                self.expr_sources(i, out, guards);
            }
            ExprKind::Member(c, _) | ExprKind::Length(c) | ExprKind::Unary(_, c)
            | ExprKind::Unchecked(c) => self.expr_sources(c, out, guards),
            ExprKind::Binary(_, l, r) => {
                self.expr_sources(l, out, guards);
                self.expr_sources(r, out, guards);
            }
            _ => expr_vars(e, out),
        }
    }

    fn note_state_write(&mut self, name: &str) {
        self.written_state.insert(name.to_string());
    }

    fn apply_call(&mut self, callee: &str, args: &[Expr], guards: &NameSet) {
        let Some(summary) = self.summaries.get(callee).cloned() else {
            return;
        };
        for (target, sources) in &summary.state_writes {
            let mut subst = guards.clone();
            substitute_placeholders(sources, args, &mut subst);
            self.add_edges(target, &subst);
            self.note_state_write(target);
        }
    }
}

/// Replaces `#i` placeholders with the variables of the i-th argument.
fn substitute_placeholders(names: &NameSet, args: &[Expr], out: &mut NameSet) {
    for n in names {
        if let Some(rest) = n.strip_prefix('#') {
            if let Ok(i) = rest.parse::<usize>() {
                if let Some(arg) = args.get(i) {
                    expr_vars(arg, out);
                    continue;
                }
            }
        }
        out.insert(n.clone());
    }
}

/// `exits` accumulates condition variables on paths to a `return`;
/// `may_return` reports whether one exists.
fn return_guard_vars(stmts: &[Stmt], exits: &mut NameSet, may_return: &mut bool) {
    for s in stmts {
        match s {
            Stmt::Return(_) => *may_return = true,
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let mut inner_exits = NameSet::new();
                let mut inner_ret = false;
                return_guard_vars(then_branch, &mut inner_exits, &mut inner_ret);
                return_guard_vars(else_branch, &mut inner_exits, &mut inner_ret);
                if inner_ret {
                    *may_return = true;
                    expr_vars(cond, exits);
                    exits.extend(inner_exits);
                }
            }
            Stmt::For { cond, body, .. } => {
                let mut inner_exits = NameSet::new();
                let mut inner_ret = false;
                return_guard_vars(body, &mut inner_exits, &mut inner_ret);
                if inner_ret {
                    *may_return = true;
                    expr_vars(cond, exits);
                    exits.extend(inner_exits);
                }
            }
            _ => {}
        }
    }
}

/// Base names referenced by an expression, including `msg.sender` and
/// `block.number` under those spellings.
pub fn expr_vars(e: &Expr, out: &mut NameSet) {
    match &e.kind {
        ExprKind::Var(name) => {
            out.insert(name.clone());
        }
        ExprKind::MsgSender => {
            out.insert("msg.sender".to_string());
        }
        ExprKind::BlockNumber => {
            out.insert("block.number".to_string());
        }
        ExprKind::Index(c, i) => {
            expr_vars(c, out);
            expr_vars(i, out);
        }
        ExprKind::Member(c, _) | ExprKind::Length(c) | ExprKind::Unary(_, c)
        | ExprKind::Unchecked(c) => expr_vars(c, out),
        ExprKind::Binary(_, l, r) => {
            expr_vars(l, out);
            expr_vars(r, out);
        }
        ExprKind::Call { args, .. } => {
            // Conservative: the call's value may depend on any argument and
            // any state the callee reads; state reads are folded in by the
            // caller via summaries for statement calls. For expression calls
            // the argument sources are the precise part we track.
            for a in args {
                expr_vars(a, out);
            }
        }
        ExprKind::Number(_) | ExprKind::Bool(_) | ExprKind::Str(_) | ExprKind::AddrLit(_) => {}
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

    #[test]
    fn index_and_source_flow_into_target() {
        let d = DependenceRelation::compute(&token());
        assert!(d.related("transferFrom", "balances", "to"));
        assert!(d.related("transferFrom", "balances", "from"));
        assert!(d.related("transferFrom", "balances", "tokens"));
        assert!(d.related("transferFrom", "allows", "msg.sender"));
        // Symmetry.
        assert!(d.related("transferFrom", "to", "balances"));
    }

    #[test]
    fn unrelated_names_stay_unrelated() {
        let d = DependenceRelation::compute(&token());
        assert!(!d.related("transferFrom", "totalSupply", "tokens"));
        assert!(!d.related("transferFrom", "totalSupply", "balances"));
        assert!(!d.related("transferFrom", "block.number", "balances"));
    }

    #[test]
    fn reflexive_on_universe_members() {
        let d = DependenceRelation::compute(&token());
        assert!(d.related("transferFrom", "totalSupply", "totalSupply"));
        assert!(d.related("transferFrom", "from", "from"));
        assert!(!d.related("transferFrom", "nonexistent", "nonexistent"));
    }

    #[test]
    fn early_return_makes_later_writes_control_dependent() {
        // The write to x sits after `if (a == 0) return`, so it is
        // control-dependent on `a` even though `a` never flows into it.
        let c = parse_contract(
            "t.mc",
            r#"contract C {
                uint x;
                function f(uint a, uint b) public returns (bool) {
                    if (a == 0) { return false; }
                    x = b;
                    return true;
                }
            }"#,
        )
        .unwrap();
        let dc = DependenceRelation::compute(&c);
        assert!(dc.related("f", "x", "a"));
        assert!(dc.related("f", "x", "b"));
        assert!(dc.related("f", "a", "b"), "co-members of the x cluster");
    }

    #[test]
    fn guards_do_not_leak_from_revert_only_branches() {
        let c = parse_contract(
            "t.mc",
            r#"contract C {
                uint x;
                function f(uint a, uint b) public {
                    if (a == 0) { revert; }
                    x = b;
                }
            }"#,
        )
        .unwrap();
        let d = DependenceRelation::compute(&c);
        assert!(!d.related("f", "x", "a"));
        assert!(d.related("f", "x", "b"));
    }

    #[test]
    fn flows_through_locals_and_internal_calls() {
        let c = parse_contract(
            "t.mc",
            r#"contract C {
                uint total;
                uint other;
                function bump(uint v) internal {
                    uint doubled = v + v;
                    total = total + doubled;
                }
                function f(uint amount) public {
                    bump(amount);
                }
            }"#,
        )
        .unwrap();
        let d = DependenceRelation::compute(&c);
        assert!(d.related("f", "total", "amount"));
        assert!(!d.related("f", "other", "amount"));
    }

    #[test]
    fn loop_condition_guards_body_writes() {
        let c = parse_contract(
            "t.mc",
            r#"contract C {
                uint total;
                function f(address[] rs, uint v) public {
                    for (uint i = 0; i < rs.length; i++) {
                        total = total - v;
                    }
                }
            }"#,
        )
        .unwrap();
        let d = DependenceRelation::compute(&c);
        assert!(d.related("f", "total", "rs"));
        assert!(d.related("f", "total", "v"));
    }
}
