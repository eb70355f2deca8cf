//! Type checker. Fills in `Expr::ty` on every node and validates the
//! declaration restrictions: mapping keys are `address` or `uint`, mapping
//! nesting is at most two levels, public parameters are value types, and
//! internal calls are non-recursive.

use super::ast::*;
use crate::diag::{Diagnostic, Span};
use std::collections::{HashMap, HashSet};

type TResult<T> = Result<T, Diagnostic>;

struct Ctx<'a> {
    file: &'a str,
    structs: HashMap<String, &'a StructDecl>,
    state: HashMap<String, Type>,
    fns: HashMap<String, (Vec<Type>, Option<Type>)>,
    locals: Vec<HashMap<String, Type>>,
    params: HashMap<String, Type>,
    ret: Option<Type>,
}

/// Type-checks `contract` in place.
pub fn typecheck(file: &str, contract: &mut Contract) -> TResult<()> {
    let mut structs: HashMap<String, &StructDecl> = HashMap::new();
    for s in &contract.structs {
        if structs.insert(s.name.clone(), s).is_some() {
            return Err(err(file, Span::default(), format!("duplicate struct `{}`", s.name)));
        }
    }
    for s in &contract.structs {
        for f in &s.fields {
            check_field_type(file, &structs, &f.ty).map_err(|m| err(file, Span::default(), m))?;
        }
    }

    let mut state = HashMap::new();
    for v in &contract.state_vars {
        check_state_type(file, &structs, &v.ty).map_err(|m| err(file, Span::default(), m))?;
        if state.insert(v.name.clone(), v.ty.clone()).is_some() {
            return Err(err(
                file,
                Span::default(),
                format!("duplicate state variable `{}`", v.name),
            ));
        }
    }

    let mut fns = HashMap::new();
    let mut all_fns: Vec<&Function> = contract.functions.iter().collect();
    if let Some(ctor) = &contract.constructor {
        all_fns.push(ctor);
    }
    for f in &all_fns {
        let param_tys: Vec<Type> = f.params.iter().map(|p| p.ty.clone()).collect();
        if fns
            .insert(f.name.clone(), (param_tys, f.returns.clone()))
            .is_some()
        {
            return Err(err(
                file,
                Span::default(),
                format!("duplicate function `{}`", f.name),
            ));
        }
    }

    check_no_recursion(file, &all_fns)?;

    // The context borrows the struct table immutably, so bodies are checked
    // on clones and written back afterwards.
    let struct_decls = contract.structs.clone();
    let structs_owned: HashMap<String, &StructDecl> =
        struct_decls.iter().map(|s| (s.name.clone(), s)).collect();

    let check_fn = |f: &mut Function| -> TResult<()> {
        let mut ctx = Ctx {
            file,
            structs: structs_owned.clone(),
            state: state.clone(),
            fns: fns.clone(),
            locals: vec![HashMap::new()],
            params: HashMap::new(),
            ret: f.returns.clone(),
        };
        for p in &f.params {
            if !p.ty.is_value_type() {
                return Err(err(
                    file,
                    Span::default(),
                    format!("parameter `{}` of `{}` must have a value type, not {}", p.name, f.name, p.ty),
                ));
            }
            if ctx.state.contains_key(&p.name)
                || ctx.params.insert(p.name.clone(), p.ty.clone()).is_some()
            {
                return Err(err(
                    file,
                    Span::default(),
                    format!("parameter `{}` of `{}` shadows another declaration", p.name, f.name),
                ));
            }
        }
        if let Some(rt) = &f.returns {
            if !rt.is_value_type() {
                return Err(err(
                    file,
                    Span::default(),
                    format!("return type of `{}` must be a value type, not {}", f.name, rt),
                ));
            }
        }
        ctx.check_block(&mut f.body)
    };

    for f in &mut contract.functions {
        check_fn(f)?;
    }
    if let Some(ctor) = &mut contract.constructor {
        check_fn(ctor)?;
    }
    Ok(())
}

fn err(file: &str, span: Span, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::error(file, span, msg)
}

fn check_key_type(ty: &Type) -> Result<(), String> {
    match ty {
        Type::Address | Type::Uint => Ok(()),
        other => Err(format!("mapping key must be address or uint, not {other}")),
    }
}

fn check_state_type(
    file: &str,
    structs: &HashMap<String, &StructDecl>,
    ty: &Type,
) -> Result<(), String> {
    match ty {
        Type::Mapping(k, v) => {
            check_key_type(k)?;
            match &**v {
                Type::Mapping(k2, v2) => {
                    check_key_type(k2)?;
                    if matches!(**v2, Type::Mapping(..)) {
                        return Err("mappings nest at most two levels".to_string());
                    }
                    check_field_type(file, structs, v2)
                }
                other => check_field_type(file, structs, other),
            }
        }
        other => check_field_type(file, structs, other),
    }
}

/// Value types plus struct references; no mappings.
fn check_field_type(
    _file: &str,
    structs: &HashMap<String, &StructDecl>,
    ty: &Type,
) -> Result<(), String> {
    match ty {
        Type::Uint | Type::Int | Type::Bool | Type::Address | Type::Str | Type::Bytes => Ok(()),
        Type::Array(elem) => match &**elem {
            Type::Mapping(..) => Err("arrays of mappings are not supported".to_string()),
            other => check_field_type(_file, structs, other),
        },
        Type::Struct(name) => {
            if structs.contains_key(name) {
                Ok(())
            } else {
                Err(format!("unknown struct `{name}`"))
            }
        }
        Type::Mapping(..) => Err("mapping not allowed here".to_string()),
        Type::Unknown => Err("unresolved type".to_string()),
    }
}

fn check_no_recursion(file: &str, fns: &[&Function]) -> TResult<()> {
    let mut calls: HashMap<&str, HashSet<String>> = HashMap::new();
    for f in fns {
        let mut callees = HashSet::new();
        collect_calls(&f.body, &mut callees);
        calls.insert(f.name.as_str(), callees);
    }
    // Depth-first search for a cycle in the call graph.
    fn visit(
        name: &str,
        calls: &HashMap<&str, HashSet<String>>,
        visiting: &mut Vec<String>,
        done: &mut HashSet<String>,
    ) -> Result<(), String> {
        if done.contains(name) {
            return Ok(());
        }
        if visiting.iter().any(|v| v == name) {
            return Err(name.to_string());
        }
        visiting.push(name.to_string());
        if let Some(callees) = calls.get(name) {
            for c in callees {
                visit(c, calls, visiting, done)?;
            }
        }
        visiting.pop();
        done.insert(name.to_string());
        Ok(())
    }
    let mut done = HashSet::new();
    for f in fns {
        visit(&f.name, &calls, &mut Vec::new(), &mut done)
            .map_err(|n| err(file, Span::default(), format!("recursive call involving `{n}`")))?;
    }
    Ok(())
}

fn collect_calls(stmts: &[Stmt], out: &mut HashSet<String>) {
    for s in stmts {
        match s {
            Stmt::Call { callee, args } => {
                out.insert(callee.clone());
                for a in args {
                    collect_calls_expr(a, out);
                }
            }
            Stmt::Local { init: Some(e), .. } | Stmt::Require(e) | Stmt::Assert(e) => {
                collect_calls_expr(e, out)
            }
            Stmt::Return(Some(e)) => collect_calls_expr(e, out),
            Stmt::Assign { target, value } => {
                for acc in &target.accessors {
                    if let Accessor::Index(i) = acc {
                        collect_calls_expr(i, out);
                    }
                }
                collect_calls_expr(value, out);
            }
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                collect_calls_expr(cond, out);
                collect_calls(then_branch, out);
                collect_calls(else_branch, out);
            }
            Stmt::For {
                init,
                cond,
                update,
                body,
            } => {
                collect_calls(std::slice::from_ref(init), out);
                collect_calls_expr(cond, out);
                collect_calls(std::slice::from_ref(update), out);
                collect_calls(body, out);
            }
            Stmt::Local { init: None, .. } | Stmt::Revert | Stmt::Return(None) => {}
        }
    }
}

fn collect_calls_expr(e: &Expr, out: &mut HashSet<String>) {
    match &e.kind {
        ExprKind::Call { callee, args } => {
            out.insert(callee.clone());
            for a in args {
                collect_calls_expr(a, out);
            }
        }
        ExprKind::Index(a, b) | ExprKind::Binary(_, a, b) => {
            collect_calls_expr(a, out);
            collect_calls_expr(b, out);
        }
        ExprKind::Member(a, _) | ExprKind::Length(a) | ExprKind::Unary(_, a) | ExprKind::Unchecked(a) => {
            collect_calls_expr(a, out)
        }
        _ => {}
    }
}

impl<'a> Ctx<'a> {
    fn err(&self, span: Span, msg: impl Into<String>) -> Diagnostic {
        err(self.file, span, msg)
    }

    fn lookup(&self, name: &str) -> Option<Type> {
        for scope in self.locals.iter().rev() {
            if let Some(t) = scope.get(name) {
                return Some(t.clone());
            }
        }
        self.params
            .get(name)
            .cloned()
            .or_else(|| self.state.get(name).cloned())
    }

    fn declare_local(&mut self, name: &str, ty: Type, span: Span) -> TResult<()> {
        if self.lookup(name).is_some() {
            return Err(self.err(span, format!("`{name}` shadows another declaration")));
        }
        self.locals
            .last_mut()
            .expect("scope stack is never empty")
            .insert(name.to_string(), ty);
        Ok(())
    }

    fn check_block(&mut self, stmts: &mut [Stmt]) -> TResult<()> {
        self.locals.push(HashMap::new());
        let result = stmts.iter_mut().try_for_each(|s| self.check_stmt(s));
        self.locals.pop();
        result
    }

    fn check_stmt(&mut self, stmt: &mut Stmt) -> TResult<()> {
        match stmt {
            Stmt::Local { name, ty, init } => {
                if matches!(ty, Type::Mapping(..)) {
                    return Err(self.err(
                        Span::default(),
                        format!("local `{name}` cannot have a mapping type"),
                    ));
                }
                check_field_type(self.file, &self.structs, ty)
                    .map_err(|m| self.err(Span::default(), m))?;
                if let Some(e) = init {
                    let span = e.span;
                    let got = self.check_expr(e, Some(ty))?;
                    if got != *ty {
                        return Err(self.err(
                            span,
                            format!("cannot initialize `{name}` of type {ty} with {got}"),
                        ));
                    }
                }
                self.declare_local(name, ty.clone(), Span::default())
            }
            Stmt::Assign { target, value } => {
                let tty = self.check_lvalue(target)?;
                if matches!(tty, Type::Mapping(..)) {
                    return Err(self.err(target.span, "cannot assign a whole mapping"));
                }
                let span = value.span;
                let got = self.check_expr(value, Some(&tty))?;
                if got != tty {
                    return Err(self.err(span, format!("cannot assign {got} to {tty}")));
                }
                Ok(())
            }
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                self.check_bool(cond)?;
                self.check_block(then_branch)?;
                self.check_block(else_branch)
            }
            Stmt::For {
                init,
                cond,
                update,
                body,
            } => {
                self.locals.push(HashMap::new());
                let r = (|| {
                    self.check_stmt(init)?;
                    self.check_bool(cond)?;
                    self.check_stmt(update)?;
                    self.check_block(body)
                })();
                self.locals.pop();
                r
            }
            Stmt::Require(cond) | Stmt::Assert(cond) => self.check_bool(cond),
            Stmt::Revert => Ok(()),
            Stmt::Return(value) => match (&self.ret.clone(), value) {
                (None, None) => Ok(()),
                (None, Some(e)) => Err(self.err(e.span, "function has no return value")),
                (Some(rt), Some(e)) => {
                    let span = e.span;
                    let got = self.check_expr(e, Some(rt))?;
                    if got != *rt {
                        Err(self.err(span, format!("cannot return {got} from function returning {rt}")))
                    } else {
                        Ok(())
                    }
                }
                (Some(_), None) => Err(self.err(
                    Span::default(),
                    "function with a return type must return a value",
                )),
            },
            Stmt::Call { callee, args } => {
                self.check_call(callee, args, Span::default())?;
                Ok(())
            }
        }
    }

    fn check_bool(&mut self, cond: &mut Expr) -> TResult<()> {
        let span = cond.span;
        let t = self.check_expr(cond, Some(&Type::Bool))?;
        if t != Type::Bool {
            return Err(self.err(span, format!("condition must be bool, found {t}")));
        }
        Ok(())
    }

    fn check_lvalue(&mut self, lv: &mut LValue) -> TResult<Type> {
        let mut ty = self
            .lookup(&lv.base)
            .ok_or_else(|| self.err(lv.span, format!("unknown variable `{}`", lv.base)))?;
        for acc in &mut lv.accessors {
            ty = match acc {
                Accessor::Index(idx) => self.check_index(&ty, idx, lv.span)?,
                Accessor::Member(field) => self.member_type(&ty, field, lv.span)?,
            };
        }
        Ok(ty)
    }

    fn check_index(&mut self, container: &Type, idx: &mut Expr, span: Span) -> TResult<Type> {
        match container {
            Type::Mapping(k, v) => {
                let ispan = idx.span;
                let it = self.check_expr(idx, Some(k))?;
                if it != **k {
                    return Err(self.err(ispan, format!("mapping expects {k} key, found {it}")));
                }
                Ok((**v).clone())
            }
            Type::Array(elem) => {
                let ispan = idx.span;
                let it = self.check_expr(idx, Some(&Type::Uint))?;
                if it != Type::Uint {
                    return Err(self.err(ispan, format!("array index must be uint, found {it}")));
                }
                Ok((**elem).clone())
            }
            other => Err(self.err(span, format!("{other} cannot be indexed"))),
        }
    }

    fn member_type(&self, container: &Type, field: &str, span: Span) -> TResult<Type> {
        match container {
            Type::Struct(name) => {
                let decl = self
                    .structs
                    .get(name)
                    .ok_or_else(|| self.err(span, format!("unknown struct `{name}`")))?;
                decl.fields
                    .iter()
                    .find(|f| f.name == field)
                    .map(|f| f.ty.clone())
                    .ok_or_else(|| self.err(span, format!("struct `{name}` has no field `{field}`")))
            }
            other => Err(self.err(span, format!("{other} has no members"))),
        }
    }

    fn check_call(&mut self, callee: &str, args: &mut [Expr], span: Span) -> TResult<Option<Type>> {
        let (param_tys, ret) = self
            .fns
            .get(callee)
            .cloned()
            .ok_or_else(|| self.err(span, format!("unknown function `{callee}`")))?;
        if callee == "constructor" {
            return Err(self.err(span, "the constructor cannot be called"));
        }
        if args.len() != param_tys.len() {
            return Err(self.err(
                span,
                format!(
                    "`{callee}` expects {} argument(s), found {}",
                    param_tys.len(),
                    args.len()
                ),
            ));
        }
        for (a, pt) in args.iter_mut().zip(&param_tys) {
            let aspan = a.span;
            let at = self.check_expr(a, Some(pt))?;
            if at != *pt {
                return Err(self.err(aspan, format!("argument type {at} does not match {pt}")));
            }
        }
        Ok(ret)
    }

    /// Infers and stores the type of `e`. `expected` only steers numeric
    /// literals, which default to `uint` otherwise.
    fn check_expr(&mut self, e: &mut Expr, expected: Option<&Type>) -> TResult<Type> {
        let ty = match &mut e.kind {
            ExprKind::Number(_) => match expected {
                Some(Type::Int) => Type::Int,
                _ => Type::Uint,
            },
            ExprKind::Bool(_) => Type::Bool,
            ExprKind::Str(_) => Type::Str,
            ExprKind::AddrLit(_) => Type::Address,
            ExprKind::MsgSender => Type::Address,
            ExprKind::BlockNumber => Type::Uint,
            ExprKind::Var(name) => self
                .lookup(name)
                .ok_or_else(|| self.err(e.span, format!("unknown variable `{name}`")))?,
            ExprKind::Index(container, idx) => {
                let ct = self.check_expr(container, None)?;
                self.check_index(&ct, idx, e.span)?
            }
            ExprKind::Member(container, field) => {
                let ct = self.check_expr(container, None)?;
                self.member_type(&ct, field, e.span)?
            }
            ExprKind::Length(inner) => {
                let it = self.check_expr(inner, None)?;
                match it {
                    Type::Array(_) | Type::Bytes | Type::Str => Type::Uint,
                    other => {
                        return Err(self.err(e.span, format!("{other} has no length")))
                    }
                }
            }
            ExprKind::Unary(UnOp::Not, inner) => {
                let it = self.check_expr(inner, Some(&Type::Bool))?;
                if it != Type::Bool {
                    return Err(self.err(e.span, format!("`!` expects bool, found {it}")));
                }
                Type::Bool
            }
            ExprKind::Binary(op, lhs, rhs) => {
                let op = *op;
                if op.is_logical() {
                    let lt = self.check_expr(lhs, Some(&Type::Bool))?;
                    let rt = self.check_expr(rhs, Some(&Type::Bool))?;
                    if lt != Type::Bool || rt != Type::Bool {
                        return Err(self.err(
                            e.span,
                            format!("`{}` expects bool operands, found {lt} and {rt}", op.symbol()),
                        ));
                    }
                    Type::Bool
                } else {
                    // Infer one side first so a literal on the other side can
                    // pick up its type.
                    let hint = match expected {
                        Some(t) if op.is_arithmetic() => Some(t.clone()),
                        _ => None,
                    };
                    let lt = self.check_expr(lhs, hint.as_ref())?;
                    let rt = self.check_expr(rhs, Some(&lt))?;
                    let (lt, rt) = if lt != rt && matches!(lhs.kind, ExprKind::Number(_)) {
                        // Re-type a bare literal against the right side.
                        let lt2 = self.check_expr(lhs, Some(&rt))?;
                        (lt2, rt)
                    } else {
                        (lt, rt)
                    };
                    if lt != rt {
                        return Err(self.err(
                            e.span,
                            format!("`{}` operand types differ: {lt} vs {rt}", op.symbol()),
                        ));
                    }
                    if op.is_arithmetic() {
                        if !lt.is_numeric() {
                            return Err(self.err(
                                e.span,
                                format!("`{}` expects numeric operands, found {lt}", op.symbol()),
                            ));
                        }
                        lt
                    } else if op.is_comparison() {
                        if !lt.is_numeric() {
                            return Err(self.err(
                                e.span,
                                format!("`{}` expects numeric operands, found {lt}", op.symbol()),
                            ));
                        }
                        Type::Bool
                    } else {
                        // Equality: any value type compares with itself.
                        match lt {
                            Type::Uint | Type::Int | Type::Bool | Type::Address | Type::Str
                            | Type::Bytes => Type::Bool,
                            other => {
                                return Err(self.err(
                                    e.span,
                                    format!("`{}` cannot compare {other} values", op.symbol()),
                                ))
                            }
                        }
                    }
                }
            }
            ExprKind::Unchecked(inner) => {
                let it = self.check_expr(inner, expected)?;
                if !it.is_numeric() {
                    return Err(self.err(e.span, format!("unchecked expects numeric, found {it}")));
                }
                it
            }
            ExprKind::Call { callee, args } => {
                let callee = callee.clone();
                match self.check_call(&callee, args, e.span)? {
                    Some(rt) => rt,
                    None => {
                        return Err(self.err(
                            e.span,
                            format!("`{callee}` has no return value and cannot be used in an expression"),
                        ))
                    }
                }
            }
        };
        e.ty = ty.clone();
        Ok(ty)
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_contract;

    fn check_err(src: &str) -> String {
        parse_contract("t.mc", src).unwrap_err().to_string()
    }

    #[test]
    fn accepts_well_typed_contract() {
        parse_contract(
            "t.mc",
            r#"contract C {
                uint total;
                mapping(address => uint) bal;
                function move(address who, uint amt) public returns (bool) {
                    require(amt <= bal[who]);
                    bal[who] = bal[who] - amt;
                    total = total.sub(amt);
                    return true;
                }
            }"#,
        )
        .unwrap();
    }

    #[test]
    fn rejects_unknown_variable() {
        let msg = check_err("contract C { uint x; function f() public { y = 1; } }");
        assert!(msg.contains("unknown variable `y`"), "{msg}");
    }

    #[test]
    fn rejects_type_mismatch_in_assignment() {
        let msg = check_err("contract C { uint x; function f(bool b) public { x = b; } }");
        assert!(msg.contains("cannot assign bool to uint"), "{msg}");
    }

    #[test]
    fn rejects_non_bool_condition() {
        let msg = check_err("contract C { uint x; function f() public { if (x + 1) { x = 0; } } }");
        assert!(msg.contains("condition must be bool"), "{msg}");
    }

    #[test]
    fn rejects_triple_nested_mapping() {
        let msg = check_err(
            "contract C { mapping(address => mapping(address => mapping(address => uint))) m; }",
        );
        assert!(msg.contains("nest at most two levels"), "{msg}");
    }

    #[test]
    fn rejects_bool_mapping_key() {
        let msg = check_err("contract C { mapping(bool => uint) m; }");
        assert!(msg.contains("mapping key must be address or uint"), "{msg}");
    }

    #[test]
    fn rejects_recursive_internal_call() {
        let msg = check_err(
            "contract C { uint x; function f() internal { g(); } function g() internal { f(); } }",
        );
        assert!(msg.contains("recursive call"), "{msg}");
    }

    #[test]
    fn rejects_mapping_parameter() {
        let msg = check_err(
            "contract C { function f(mapping(address => uint) m) public { revert; } }",
        );
        assert!(msg.contains("must have a value type"), "{msg}");
    }

    #[test]
    fn literal_adopts_int_context() {
        let c = parse_contract(
            "t.mc",
            "contract C { int x; function f() public { x = x - 1; } }",
        )
        .unwrap();
        match &c.functions[0].body[0] {
            crate::lang::ast::Stmt::Assign { value, .. } => {
                assert_eq!(value.ty, crate::lang::ast::Type::Int)
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn array_and_length() {
        parse_contract(
            "t.mc",
            r#"contract C {
                uint total;
                function f(address[] rs, uint v) public {
                    uint n = rs.length;
                    for (uint i = 0; i < n; i++) {
                        total = total + v;
                    }
                }
            }"#,
        )
        .unwrap();
    }

    #[test]
    fn rejects_parameter_shadowing_state() {
        let msg = check_err("contract C { uint x; function f(uint x) public { revert; } }");
        assert!(msg.contains("shadows"), "{msg}");
    }
}
