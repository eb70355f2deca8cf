//! Canonical pretty-printer. Printing then re-parsing yields the same AST,
//! with sugar normalized: checked arithmetic prints as operators, never in
//! method form.

use super::ast::*;
use std::fmt::Write;

pub fn print_contract(c: &Contract) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "contract {} {{", c.name);
    for s in &c.structs {
        let _ = writeln!(out, "    struct {} {{", s.name);
        for f in &s.fields {
            let _ = writeln!(out, "        {} {};", f.ty, f.name);
        }
        let _ = writeln!(out, "    }}");
    }
    for v in &c.state_vars {
        let _ = writeln!(out, "    {} {};", v.ty, v.name);
    }
    if let Some(ctor) = &c.constructor {
        out.push('\n');
        print_function(&mut out, ctor, true);
    }
    for f in &c.functions {
        out.push('\n');
        print_function(&mut out, f, false);
    }
    out.push_str("}\n");
    out
}

fn print_function(out: &mut String, f: &Function, is_ctor: bool) {
    let params = f
        .params
        .iter()
        .map(|p| format!("{} {}", p.ty, p.name))
        .collect::<Vec<_>>()
        .join(", ");
    if is_ctor {
        let _ = write!(out, "    constructor({params})");
    } else {
        let _ = write!(out, "    function {}({params})", f.name);
        match f.visibility {
            Visibility::Public => out.push_str(" public"),
            Visibility::Internal => out.push_str(" internal"),
        }
    }
    if let Some(rt) = &f.returns {
        let _ = write!(out, " returns ({rt})");
    }
    out.push_str(" {\n");
    print_block(out, &f.body, 2);
    out.push_str("    }\n");
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

fn print_block(out: &mut String, stmts: &[Stmt], level: usize) {
    for s in stmts {
        print_stmt(out, s, level);
    }
}

fn print_stmt(out: &mut String, s: &Stmt, level: usize) {
    indent(out, level);
    match s {
        Stmt::Local { name, ty, init } => {
            let _ = write!(out, "{ty} {name}");
            if let Some(e) = init {
                let _ = write!(out, " = {}", print_expr(e));
            }
            out.push_str(";\n");
        }
        Stmt::Assign { target, value } => {
            let _ = writeln!(out, "{} = {};", print_lvalue(target), print_expr(value));
        }
        Stmt::If {
            cond,
            then_branch,
            else_branch,
        } => {
            let _ = writeln!(out, "if ({}) {{", print_expr(cond));
            print_block(out, then_branch, level + 1);
            indent(out, level);
            if else_branch.is_empty() {
                out.push_str("}\n");
            } else {
                out.push_str("} else {\n");
                print_block(out, else_branch, level + 1);
                indent(out, level);
                out.push_str("}\n");
            }
        }
        Stmt::For {
            init,
            cond,
            update,
            body,
        } => {
            let mut init_s = String::new();
            print_stmt(&mut init_s, init, 0);
            let mut update_s = String::new();
            print_stmt(&mut update_s, update, 0);
            let trim = |s: &str| s.trim_end().trim_end_matches(';').to_string();
            let _ = writeln!(
                out,
                "for ({}; {}; {}) {{",
                trim(&init_s),
                print_expr(cond),
                trim(&update_s)
            );
            print_block(out, body, level + 1);
            indent(out, level);
            out.push_str("}\n");
        }
        Stmt::Require(e) => {
            let _ = writeln!(out, "require({});", print_expr(e));
        }
        Stmt::Assert(e) => {
            let _ = writeln!(out, "assert({});", print_expr(e));
        }
        Stmt::Revert => out.push_str("revert;\n"),
        Stmt::Return(None) => out.push_str("return;\n"),
        Stmt::Return(Some(e)) => {
            let _ = writeln!(out, "return {};", print_expr(e));
        }
        Stmt::Call { callee, args } => {
            let args = args.iter().map(print_expr).collect::<Vec<_>>().join(", ");
            let _ = writeln!(out, "{callee}({args});");
        }
    }
}

fn print_lvalue(lv: &LValue) -> String {
    let mut s = lv.base.clone();
    for acc in &lv.accessors {
        match acc {
            Accessor::Index(i) => {
                let _ = write!(s, "[{}]", print_expr(i));
            }
            Accessor::Member(m) => {
                let _ = write!(s, ".{m}");
            }
        }
    }
    s
}

fn prec(op: BinOp) -> u8 {
    match op {
        BinOp::Or => 1,
        BinOp::And => 2,
        BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge | BinOp::Eq | BinOp::Ne => 3,
        BinOp::Add | BinOp::Sub => 4,
        BinOp::Mul | BinOp::Div => 5,
    }
}

fn expr_prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary(op, ..) => prec(*op),
        ExprKind::Unary(..) => 6,
        _ => 7,
    }
}

pub fn print_expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Number(n) => n.to_string(),
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Str(s) => format!("{s:?}"),
        ExprKind::AddrLit(k) => format!("address({k})"),
        ExprKind::Var(name) => name.clone(),
        ExprKind::MsgSender => "msg.sender".to_string(),
        ExprKind::BlockNumber => "block.number".to_string(),
        ExprKind::Index(c, i) => format!("{}[{}]", print_expr(c), print_expr(i)),
        ExprKind::Member(c, f) => format!("{}.{f}", print_expr(c)),
        ExprKind::Length(c) => format!("{}.length", print_expr(c)),
        ExprKind::Unary(UnOp::Not, inner) => {
            if expr_prec(inner) < 6 {
                format!("!({})", print_expr(inner))
            } else {
                format!("!{}", print_expr(inner))
            }
        }
        ExprKind::Binary(op, lhs, rhs) => {
            let p = prec(*op);
            let lp = expr_prec(lhs);
            let rp = expr_prec(rhs);
            let ls = if lp < p {
                format!("({})", print_expr(lhs))
            } else {
                print_expr(lhs)
            };
            let rs = if rp <= p {
                format!("({})", print_expr(rhs))
            } else {
                print_expr(rhs)
            };
            format!("{ls} {} {rs}", op.symbol())
        }
        ExprKind::Unchecked(inner) => format!("unchecked({})", print_expr(inner)),
        ExprKind::Call { callee, args } => {
            let args = args.iter().map(print_expr).collect::<Vec<_>>().join(", ");
            format!("{callee}({args})")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_contract;

    fn round_trip(src: &str) {
        let c1 = parse_contract("t.mc", src).unwrap();
        let printed = print_contract(&c1);
        let c2 = parse_contract("t.mc", &printed).unwrap_or_else(|e| {
            panic!("re-parse failed: {e}\n--- printed ---\n{printed}");
        });
        assert_eq!(c1, c2, "--- printed ---\n{printed}");
    }

    #[test]
    fn round_trips_token_contract() {
        round_trip(
            r#"contract T {
                uint totalSupply;
                mapping(address => uint) balances;
                mapping(address => mapping(address => uint)) allows;
                function transferFrom(address from, address to, uint tokens) public returns (bool) {
                    require(msg.sender != address(0));
                    if (to == address(0)) { return false; }
                    allows[from][msg.sender] = allows[from][msg.sender].sub(tokens);
                    balances[from] = balances[from].sub(tokens);
                    balances[to] = balances[to].add(tokens);
                    return true;
                }
            }"#,
        );
    }

    #[test]
    fn round_trips_loops_structs_and_unchecked() {
        round_trip(
            r#"contract B {
                struct Box { uint v; bool open; }
                Box b;
                uint total;
                function batch(address[] rs, uint v) public {
                    uint amount = unchecked(rs.length * v);
                    require(total >= amount);
                    for (uint i = 0; i < rs.length; i++) {
                        total = total - v;
                    }
                    if (total == 0) { b.open = true; } else { b.v = total / 2; }
                }
                function helper(uint k) internal returns (uint) {
                    return k + 1;
                }
            }"#,
        );
    }

    #[test]
    fn parenthesization_preserves_shape() {
        round_trip(
            r#"contract P {
                uint x;
                bool c;
                function f(uint a, uint b) public {
                    x = (a + b) * (a - b);
                    x = a + b * a - b / 2;
                    c = !(a < b) && (c || a == b);
                    x = a - (b - 1) - 1;
                }
            }"#,
        );
    }
}
