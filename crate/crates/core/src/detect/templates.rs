//! Template catalog: the fixed grammar of candidate predicates that
//! detection instantiates over a contract's state variables and function
//! parameters.
//!
//! Structural templates (equalities, orderings, update forms) are
//! instantiated up front from the contract alone. Constant and extremum
//! templates need observed values and are instantiated by `detect`.

use super::pool::CandidatePool;
use crate::lang::ast::{Contract, Function, Type};
use crate::spec::{ArithOp, CmpOp, Phase, Predicate, Scope, SpecExpr};

#[derive(Debug, Clone)]
pub struct TemplateCatalog {
    /// `X == c` is instantiated only when a term takes at most this many
    /// distinct observed values.
    pub max_constants: usize,
}

impl Default for TemplateCatalog {
    fn default() -> TemplateCatalog {
        TemplateCatalog { max_constants: 8 }
    }
}

/// How a term participates in templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TermKind {
    /// Numeric. `nonneg` terms (uint, lengths, sums of uint mappings)
    /// skip the trivial `X >= 0` extremum.
    Num { nonneg: bool },
    Addr,
    Bool,
}

#[derive(Debug, Clone)]
pub(crate) struct Term {
    pub expr: SpecExpr,
    pub kind: TermKind,
}

impl Term {
    fn num(expr: SpecExpr, nonneg: bool) -> Term {
        Term { expr, kind: TermKind::Num { nonneg } }
    }
}

fn state_ref(name: &str, phase: Phase) -> SpecExpr {
    SpecExpr::StateVar { name: name.to_string(), phase }
}

fn scalar_term(expr: SpecExpr, ty: &Type) -> Option<Term> {
    match ty {
        Type::Uint => Some(Term::num(expr, true)),
        Type::Int => Some(Term::num(expr, false)),
        Type::Bool => Some(Term { expr, kind: TermKind::Bool }),
        Type::Address => Some(Term { expr, kind: TermKind::Addr }),
        _ => None,
    }
}

/// Scalar projections of the state: bare variables, struct members,
/// lengths, and mapping sums — no parameter-indexed items.
fn state_terms(contract: &Contract, phase: Phase) -> Vec<Term> {
    let mut out = Vec::new();
    for v in &contract.state_vars {
        let base = state_ref(&v.name, phase);
        match &v.ty {
            Type::Uint | Type::Int | Type::Bool | Type::Address => {
                out.extend(scalar_term(base, &v.ty));
            }
            Type::Str | Type::Bytes | Type::Array(_) => {
                out.push(Term::num(SpecExpr::Len(Box::new(base)), true));
            }
            Type::Mapping(_, val) => {
                out.push(Term::num(SpecExpr::Len(Box::new(base.clone())), true));
                match val.as_ref() {
                    Type::Uint => out.push(Term::num(SpecExpr::SumMap(Box::new(base)), true)),
                    Type::Int => out.push(Term::num(SpecExpr::SumMap(Box::new(base)), false)),
                    _ => {}
                }
            }
            Type::Struct(sname) => {
                if let Some(decl) = contract.struct_decl(sname) {
                    for field in &decl.fields {
                        let e = SpecExpr::Member(Box::new(base.clone()), field.name.clone());
                        out.extend(scalar_term(e, &field.ty));
                    }
                }
            }
            Type::Unknown => {}
        }
    }
    out
}

/// Index expressions usable as mapping keys of the given key type:
/// matching-typed parameters, plus `msg.sender` for address keys.
fn key_indices(f: &Function, key: &Type) -> Vec<SpecExpr> {
    let mut out: Vec<SpecExpr> = f
        .params
        .iter()
        .filter(|p| p.ty == *key)
        .map(|p| SpecExpr::Param(p.name.clone()))
        .collect();
    if *key == Type::Address {
        out.push(SpecExpr::MsgSender);
    }
    out
}

/// Mapping entries reachable by indexing state mappings with the
/// function's parameters (and `msg.sender`), following one nested
/// mapping level and struct members.
fn mapping_item_terms(contract: &Contract, f: &Function, phase: Phase) -> Vec<Term> {
    let mut out = Vec::new();
    for v in &contract.state_vars {
        let Type::Mapping(key, val) = &v.ty else { continue };
        for idx in key_indices(f, key) {
            let item = SpecExpr::Index(Box::new(state_ref(&v.name, phase)), Box::new(idx));
            push_value_terms(contract, f, item, val, &mut out, true);
        }
    }
    out
}

fn push_value_terms(
    contract: &Contract,
    f: &Function,
    item: SpecExpr,
    val: &Type,
    out: &mut Vec<Term>,
    allow_nesting: bool,
) {
    match val {
        Type::Uint | Type::Int | Type::Bool | Type::Address => {
            out.extend(scalar_term(item, val));
        }
        Type::Struct(sname) => {
            if let Some(decl) = contract.struct_decl(sname) {
                for field in &decl.fields {
                    let e = SpecExpr::Member(Box::new(item.clone()), field.name.clone());
                    out.extend(scalar_term(e, &field.ty));
                }
            }
        }
        Type::Mapping(key2, val2) if allow_nesting => {
            for idx2 in key_indices(f, key2) {
                let inner = SpecExpr::Index(Box::new(item.clone()), Box::new(idx2));
                push_value_terms(contract, f, inner, val2, out, false);
            }
        }
        _ => {}
    }
}

/// Call-context terms: scalar parameters, array/string parameter lengths,
/// `msg.sender`, `block.number`.
fn param_terms(f: &Function) -> Vec<Term> {
    let mut out = Vec::new();
    for p in &f.params {
        let e = SpecExpr::Param(p.name.clone());
        match &p.ty {
            Type::Uint | Type::Int | Type::Bool | Type::Address => {
                out.extend(scalar_term(e, &p.ty));
            }
            Type::Str | Type::Bytes | Type::Array(_) => {
                out.push(Term::num(SpecExpr::Len(Box::new(e)), true));
            }
            _ => {}
        }
    }
    out.push(Term { expr: SpecExpr::MsgSender, kind: TermKind::Addr });
    out.push(Term::num(SpecExpr::BlockNumber, true));
    out
}

/// The term universe a scope's templates range over.
pub(crate) fn scope_terms(contract: &Contract, scope: &Scope) -> Vec<Term> {
    match scope {
        Scope::ContractInv => state_terms(contract, Phase::Pre),
        Scope::Requires(fname) => {
            let f = contract.function(fname).expect("scope names a known function");
            let mut terms = state_terms(contract, Phase::Pre);
            terms.extend(mapping_item_terms(contract, f, Phase::Pre));
            terms.extend(param_terms(f));
            terms
        }
        Scope::Ensures(fname) => {
            let f = contract.function(fname).expect("scope names a known function");
            let mut terms = state_terms(contract, Phase::Post);
            terms.extend(mapping_item_terms(contract, f, Phase::Post));
            terms.extend(state_terms(contract, Phase::Pre));
            terms.extend(mapping_item_terms(contract, f, Phase::Pre));
            terms.extend(param_terms(f));
            terms
        }
    }
}

pub(crate) fn mentions_phase(e: &SpecExpr, phase: Phase) -> bool {
    match e {
        SpecExpr::StateVar { phase: p, .. } => *p == phase,
        SpecExpr::Len(a) | SpecExpr::SumMap(a) => mentions_phase(a, phase),
        SpecExpr::Index(a, b) | SpecExpr::Arith(_, a, b) => {
            mentions_phase(a, phase) || mentions_phase(b, phase)
        }
        SpecExpr::Member(a, _) => mentions_phase(a, phase),
        _ => false,
    }
}

/// In `Ensures` scope, a candidate that reads pre-state but no post-state
/// restates a `Requires`-scope fact; only post-state and pure call-context
/// candidates carry new information.
pub(crate) fn ensures_shape_ok(exprs: &[&SpecExpr]) -> bool {
    exprs.iter().any(|e| mentions_phase(e, Phase::Post))
        || !exprs.iter().any(|e| mentions_phase(e, Phase::Pre))
}

/// Swap every state-variable reference to the other phase.
pub(crate) fn at_phase(e: &SpecExpr, phase: Phase) -> SpecExpr {
    match e {
        SpecExpr::StateVar { name, .. } => SpecExpr::StateVar { name: clone_name(name), phase },
        SpecExpr::Len(a) => SpecExpr::Len(Box::new(at_phase(a, phase))),
        SpecExpr::SumMap(a) => SpecExpr::SumMap(Box::new(at_phase(a, phase))),
        SpecExpr::Index(a, b) => {
            SpecExpr::Index(Box::new(at_phase(a, phase)), Box::new(at_phase(b, phase)))
        }
        SpecExpr::Member(a, m) => SpecExpr::Member(Box::new(at_phase(a, phase)), m.clone()),
        SpecExpr::Arith(op, a, b) => {
            SpecExpr::Arith(*op, Box::new(at_phase(a, phase)), Box::new(at_phase(b, phase)))
        }
        other => other.clone(),
    }
}

fn clone_name(s: &str) -> String {
    s.to_string()
}

fn insert_atom(pool: &mut CandidatePool, scope: &Scope, op: CmpOp, lhs: SpecExpr, rhs: SpecExpr) {
    if matches!(scope, Scope::Ensures(_)) && !ensures_shape_ok(&[&lhs, &rhs]) {
        return;
    }
    pool.insert(scope.clone(), Predicate::atom(op, lhs, rhs));
}

fn instantiate_scope(pool: &mut CandidatePool, contract: &Contract, scope: &Scope) {
    let terms = scope_terms(contract, scope);

    for t in &terms {
        match t.kind {
            TermKind::Num { .. } => {
                insert_atom(pool, scope, CmpOp::Ne, t.expr.clone(), SpecExpr::Int(0.into()));
            }
            TermKind::Addr => {
                insert_atom(pool, scope, CmpOp::Ne, t.expr.clone(), SpecExpr::Addr(0));
            }
            TermKind::Bool => {
                insert_atom(pool, scope, CmpOp::Eq, t.expr.clone(), SpecExpr::Bool(true));
                insert_atom(pool, scope, CmpOp::Eq, t.expr.clone(), SpecExpr::Bool(false));
            }
        }
    }

    for (i, x) in terms.iter().enumerate() {
        for y in terms.iter().skip(i + 1) {
            let ops: &[CmpOp] = match (x.kind, y.kind) {
                (TermKind::Num { .. }, TermKind::Num { .. }) => {
                    &[CmpOp::Eq, CmpOp::Ne, CmpOp::Le, CmpOp::Ge]
                }
                (TermKind::Addr, TermKind::Addr) | (TermKind::Bool, TermKind::Bool) => {
                    &[CmpOp::Eq, CmpOp::Ne]
                }
                _ => &[],
            };
            for &op in ops {
                insert_atom(pool, scope, op, x.expr.clone(), y.expr.clone());
            }
        }
    }

    // Update templates `X == old(X) + Z` / `X == old(X) - Z` relate a
    // post-state term to its own pre-state value shifted by a parameter.
    if let Scope::Ensures(fname) = scope {
        let f = contract.function(fname).expect("scope names a known function");
        let params: Vec<SpecExpr> = f
            .params
            .iter()
            .filter(|p| p.ty.is_numeric())
            .map(|p| SpecExpr::Param(p.name.clone()))
            .collect();
        for t in &terms {
            if !matches!(t.kind, TermKind::Num { .. }) || !mentions_phase(&t.expr, Phase::Post) {
                continue;
            }
            let old = at_phase(&t.expr, Phase::Pre);
            for z in &params {
                for op in [ArithOp::Add, ArithOp::Sub] {
                    let rhs = SpecExpr::Arith(op, Box::new(old.clone()), Box::new(z.clone()));
                    insert_atom(pool, scope, CmpOp::Eq, t.expr.clone(), rhs);
                }
            }
        }
    }
}

/// Instantiate the structural templates for every scope of the contract:
/// one `ContractInv` scope plus `Requires`/`Ensures` scopes per public
/// function.
pub fn initialize_candidates(contract: &Contract) -> CandidatePool {
    let mut pool = CandidatePool::new();
    instantiate_scope(&mut pool, contract, &Scope::ContractInv);
    for f in contract.public_functions() {
        instantiate_scope(&mut pool, contract, &Scope::Requires(f.name.clone()));
        instantiate_scope(&mut pool, contract, &Scope::Ensures(f.name.clone()));
    }
    pool
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_contract;
    use crate::spec::canonical_key;

    fn erc20() -> Contract {
        let src = r#"
contract Token {
    uint totalSupply;
    mapping(address => uint) balances;
    mapping(address => mapping(address => uint)) allows;

    function transferFrom(address from, address to, uint tokens) public returns (bool) {
        balances[to] = balances[to].add(tokens);
        return true;
    }
}
"#;
        parse_contract("token.mc", src).expect("parses")
    }

    fn keys(pool: &CandidatePool) -> Vec<String> {
        pool.iter().map(|c| c.key()).collect()
    }

    #[test]
    fn catalog_covers_the_core_statement_forms() {
        let pool = initialize_candidates(&erc20());
        let all = keys(&pool);
        for expected in [
            "ContractInv totalSupply == SumMap(balances)",
            "Ensures transferFrom: to != a0",
            "Ensures transferFrom: from != to",
            "Ensures transferFrom: from == to",
            "Ensures transferFrom: balances[to] >= old(balances[to])",
            "Ensures transferFrom: balances[from] <= old(balances[from])",
            "Ensures transferFrom: balances[to] == old(balances[to]) + tokens",
            "Ensures transferFrom: balances[from] == old(balances[from]) - tokens",
            "Ensures transferFrom: allows[from][msg.sender] == old(allows[from][msg.sender]) - tokens",
            "Ensures transferFrom: balances[from] == old(balances[from])",
            "Ensures transferFrom: SumMap(balances) == SumMap(old(balances))",
            "Requires transferFrom: balances[from] >= tokens",
            "Requires transferFrom: msg.sender != a0",
        ] {
            assert!(all.iter().any(|k| k == expected), "missing candidate: {expected}");
        }
    }

    #[test]
    fn ensures_scope_drops_pre_only_restatements() {
        let pool = initialize_candidates(&erc20());
        for c in pool.iter() {
            if !matches!(c.scope, Scope::Ensures(_)) {
                continue;
            }
            let (mut pre, mut post) = (false, false);
            for a in c.pred.atoms() {
                if let Predicate::Atom(_, l, r) = a {
                    pre |= mentions_phase(l, Phase::Pre) || mentions_phase(r, Phase::Pre);
                    post |= mentions_phase(l, Phase::Post) || mentions_phase(r, Phase::Post);
                }
            }
            assert!(!pre || post, "pre-only candidate in Ensures: {}", c.key());
        }
        // A pre-only unary that Requires scope already expresses is absent.
        assert!(!pool.contains(
            &Scope::Ensures("transferFrom".into()),
            &Predicate::atom(
                CmpOp::Ne,
                SpecExpr::StateVar { name: "totalSupply".into(), phase: Phase::Pre },
                SpecExpr::Int(0.into())
            )
        ));
        // Call-context-only candidates stay.
        assert!(pool.contains(
            &Scope::Ensures("transferFrom".into()),
            &Predicate::atom(
                CmpOp::Ne,
                SpecExpr::Param("from".into()),
                SpecExpr::Param("to".into())
            )
        ));
    }

    #[test]
    fn update_templates_pair_posts_with_their_own_old_value() {
        let pool = initialize_candidates(&erc20());
        let all = keys(&pool);
        assert!(all
            .iter()
            .any(|k| k == "Ensures transferFrom: totalSupply == old(totalSupply) + tokens"));
        // No cross-variable update forms.
        assert!(!all
            .iter()
            .any(|k| k.contains("totalSupply == old(balances[to]) + tokens")));
    }

    #[test]
    fn nested_mappings_index_by_each_address_param_and_sender() {
        let pool = initialize_candidates(&erc20());
        let scope = Scope::Ensures("transferFrom".into());
        let sender_item = SpecExpr::Index(
            Box::new(SpecExpr::Index(
                Box::new(SpecExpr::StateVar { name: "allows".into(), phase: Phase::Post }),
                Box::new(SpecExpr::Param("from".into())),
            )),
            Box::new(SpecExpr::MsgSender),
        );
        assert!(pool.contains(
            &scope,
            &Predicate::atom(CmpOp::Ne, sender_item, SpecExpr::Int(0.into()))
        ));
    }

    #[test]
    fn no_trivial_nonneg_or_string_templates() {
        let src = r#"
contract S {
    string name;
    uint count;

    function set(uint v) public {
        count = v;
    }
}
"#;
        let contract = parse_contract("s.mc", &src[..]).expect("parses");
        let pool = initialize_candidates(&contract);
        for c in pool.iter() {
            let k = canonical_key(&c.scope, &c.pred);
            assert!(!k.contains(">= 0"), "trivial bound instantiated: {k}");
            // `name` only appears under len().
            assert!(!k.contains("name ") || k.contains("len(name"), "raw string term: {k}");
        }
    }

    #[test]
    fn instantiation_is_deterministic() {
        let c = erc20();
        let a = keys(&initialize_candidates(&c));
        let b = keys(&initialize_candidates(&c));
        assert_eq!(a, b);
    }
}
