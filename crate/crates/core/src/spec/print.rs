//! Canonical rendering of specification statements.
//!
//! Printing is the inverse of parsing: `parse(print(s))` reproduces `s`.
//! In `Ensures` scope a maximal index/member chain whose state variables
//! are all pre-state renders inside one `old(...)`; `len`/`SumMap` render
//! the marker on their argument instead (`SumMap(old(balances))`), so the
//! canonical form is unique.

use super::ast::*;
use num_traits::Signed;

pub fn print_spec_file(spec: &SpecFile) -> String {
    let mut out = String::new();
    for st in &spec.statements {
        out.push_str(&print_statement(st));
        out.push('\n');
    }
    out
}

pub fn print_statement(st: &SpecStatement) -> String {
    let mut out = String::new();
    if let Some(label) = &st.label {
        out.push_str(&format!("[{label}] "));
    }
    out.push_str(&print_scoped(&st.scope, &st.pred));
    out
}

/// Scope and predicate without any label: the canonical identity of a
/// statement, used for deduplication and stable ordering.
pub fn canonical_key(scope: &Scope, pred: &Predicate) -> String {
    print_scoped(scope, pred)
}

fn print_scoped(scope: &Scope, pred: &Predicate) -> String {
    let in_ensures = matches!(scope, Scope::Ensures(_));
    let body = print_pred(pred, in_ensures);
    match scope {
        Scope::ContractInv => format!("ContractInv {body}"),
        Scope::Requires(f) => format!("Requires {f}: {body}"),
        Scope::Ensures(f) => format!("Ensures {f}: {body}"),
    }
}

pub fn print_pred(pred: &Predicate, in_ensures: bool) -> String {
    match pred {
        Predicate::False => "false".to_string(),
        Predicate::Atom(op, lhs, rhs) => format!(
            "{} {} {}",
            print_expr(lhs, in_ensures),
            op.symbol(),
            print_expr(rhs, in_ensures)
        ),
        Predicate::And(ps) => ps
            .iter()
            .map(|p| print_pred(p, in_ensures))
            .collect::<Vec<_>>()
            .join(" && "),
        Predicate::Or(ps) => ps
            .iter()
            .map(|p| print_pred(p, in_ensures))
            .collect::<Vec<_>>()
            .join(" || "),
        Predicate::Implies(a, b) => format!(
            "{} ==> {}",
            print_pred(a, in_ensures),
            print_pred(b, in_ensures)
        ),
    }
}

pub fn print_expr(e: &SpecExpr, in_ensures: bool) -> String {
    render(e, 0, in_ensures)
}

/// Phase census of the state variables inside a subtree.
fn phases(e: &SpecExpr, pre: &mut bool, post: &mut bool) {
    match e {
        SpecExpr::StateVar { phase, .. } => match phase {
            Phase::Pre => *pre = true,
            Phase::Post => *post = true,
        },
        SpecExpr::Len(i) | SpecExpr::SumMap(i) => phases(i, pre, post),
        SpecExpr::Index(c, i) => {
            phases(c, pre, post);
            phases(i, pre, post);
        }
        SpecExpr::Member(c, _) => phases(c, pre, post),
        SpecExpr::Arith(_, l, r) => {
            phases(l, pre, post);
            phases(r, pre, post);
        }
        _ => {}
    }
}

fn all_pre(e: &SpecExpr) -> bool {
    let (mut pre, mut post) = (false, false);
    phases(e, &mut pre, &mut post);
    pre && !post
}

fn prec(e: &SpecExpr) -> u8 {
    match e {
        SpecExpr::Arith(ArithOp::Add | ArithOp::Sub, ..) => 1,
        SpecExpr::Arith(ArithOp::Mul | ArithOp::Div, ..) => 2,
        SpecExpr::Int(n) if n.is_negative() => 2,
        _ => 3,
    }
}

fn render(e: &SpecExpr, min_prec: u8, in_ensures: bool) -> String {
    // A maximal path expression that only touches pre-state wraps in old().
    if in_ensures
        && matches!(e, SpecExpr::StateVar { .. } | SpecExpr::Index(..) | SpecExpr::Member(..))
        && all_pre(e)
    {
        return format!("old({})", render_plain(e, 0));
    }
    let body = match e {
        SpecExpr::Arith(op, l, r) => {
            let p = prec(e);
            format!(
                "{} {} {}",
                render(l, p, in_ensures),
                op.symbol(),
                render(r, p + 1, in_ensures)
            )
        }
        SpecExpr::Len(inner) => format!("len({})", render(inner, 0, in_ensures)),
        SpecExpr::SumMap(inner) => format!("SumMap({})", render(inner, 0, in_ensures)),
        SpecExpr::Index(c, i) => format!(
            "{}[{}]",
            render(c, 3, in_ensures),
            render(i, 0, in_ensures)
        ),
        SpecExpr::Member(c, f) => format!("{}.{}", render(c, 3, in_ensures), f),
        leaf => render_leaf(leaf),
    };
    if prec(e) < min_prec {
        format!("({body})")
    } else {
        body
    }
}

/// Rendering inside an `old(...)` wrapper: state variables print bare.
fn render_plain(e: &SpecExpr, min_prec: u8) -> String {
    let body = match e {
        SpecExpr::Arith(op, l, r) => {
            let p = prec(e);
            format!("{} {} {}", render_plain(l, p), op.symbol(), render_plain(r, p + 1))
        }
        SpecExpr::Len(inner) => format!("len({})", render_plain(inner, 0)),
        SpecExpr::SumMap(inner) => format!("SumMap({})", render_plain(inner, 0)),
        SpecExpr::Index(c, i) => format!("{}[{}]", render_plain(c, 3), render_plain(i, 0)),
        SpecExpr::Member(c, f) => format!("{}.{}", render_plain(c, 3), f),
        leaf => render_leaf(leaf),
    };
    if prec(e) < min_prec {
        format!("({body})")
    } else {
        body
    }
}

fn render_leaf(e: &SpecExpr) -> String {
    match e {
        SpecExpr::Int(n) => n.to_string(),
        SpecExpr::Bool(b) => b.to_string(),
        SpecExpr::Addr(k) => format!("a{k}"),
        SpecExpr::Str(s) => format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"")),
        SpecExpr::MaxValue => "MAXVALUE".to_string(),
        SpecExpr::StateVar { name, .. } => name.clone(),
        SpecExpr::Param(name) => name.clone(),
        SpecExpr::MsgSender => "msg.sender".to_string(),
        SpecExpr::BlockNumber => "block.number".to_string(),
        other => unreachable!("not a leaf: {other:?}"),
    }
}
