//! Parser and well-formedness checker for specification files.
//!
//! One statement per line: an optional `[label]`, then `ContractInv p`,
//! `Requires f: p`, or `Ensures f: p`. Comments start with `#` (or `//`).
//! Names resolve against the contract: state variables, and in function
//! scopes the function's parameters; `a<k>` spellings are reserved for
//! address literals. `old(e)` is only meaningful in `Ensures` scope and
//! must cover at least one state variable.

use super::ast::*;
use crate::diag::{Diagnostic, Span};
use crate::lang::ast::{Contract, Type};
use crate::lexer::{tokenize, Tok, Token};
use num_bigint::BigInt;
use num_traits::ToPrimitive;

type PResult<T> = Result<T, Diagnostic>;

pub fn parse_spec(file: &str, src: &str, contract: &Contract) -> PResult<SpecFile> {
    let tokens = tokenize(file, src)?;
    let mut statements = Vec::new();
    // Group tokens by source line; one statement per line.
    let mut lines: Vec<Vec<Token>> = Vec::new();
    let mut current_line = 0;
    for t in tokens {
        if t.tok == Tok::Eof {
            break;
        }
        if t.span.line as usize != current_line {
            current_line = t.span.line as usize;
            lines.push(Vec::new());
        }
        lines.last_mut().expect("line started").push(t);
    }
    for mut line in lines {
        line.push(Token {
            tok: Tok::Eof,
            span: line.last().map(|t| t.span).unwrap_or_default(),
        });
        let mut p = LineParser {
            file,
            contract,
            toks: line,
            pos: 0,
            scope: Scope::ContractInv,
        };
        statements.push(p.statement()?);
    }
    Ok(SpecFile { statements })
}

/// Parses a single statement (no trailing input allowed).
pub fn parse_statement(file: &str, src: &str, contract: &Contract) -> PResult<SpecStatement> {
    let spec = parse_spec(file, src, contract)?;
    match <[SpecStatement; 1]>::try_from(spec.statements) {
        Ok([st]) => Ok(st),
        Err(sts) => Err(Diagnostic::error(
            file,
            Span::new(1, 1),
            format!("expected exactly one statement, found {}", sts.len()),
        )),
    }
}

struct LineParser<'a> {
    file: &'a str,
    contract: &'a Contract,
    toks: Vec<Token>,
    pos: usize,
    scope: Scope,
}

impl<'a> LineParser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, span: Span, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::error(self.file, span, msg)
    }

    fn expect(&mut self, want: Tok) -> PResult<Token> {
        if *self.peek() == want {
            Ok(self.bump())
        } else {
            Err(self.err(
                self.span(),
                format!("expected {}, found {}", want.describe(), self.peek().describe()),
            ))
        }
    }

    fn statement(&mut self) -> PResult<SpecStatement> {
        let label = if *self.peek() == Tok::LBracket {
            self.bump();
            let name = match self.bump() {
                Token { tok: Tok::Ident(s), .. } => s,
                t => return Err(self.err(t.span, "expected label name")),
            };
            self.expect(Tok::RBracket)?;
            Some(name)
        } else {
            None
        };

        let (kw, kw_span) = match self.bump() {
            Token { tok: Tok::Ident(s), span } => (s, span),
            t => return Err(self.err(t.span, "expected ContractInv, Requires, or Ensures")),
        };
        let scope = match kw.as_str() {
            "ContractInv" => Scope::ContractInv,
            "Requires" | "Ensures" => {
                let fname = match self.bump() {
                    Token { tok: Tok::Ident(s), .. } => s,
                    t => return Err(self.err(t.span, "expected function name")),
                };
                if self.contract.function(&fname).is_none() {
                    return Err(self.err(kw_span, format!("unknown function `{fname}`")));
                }
                self.expect(Tok::Colon)?;
                if kw == "Requires" {
                    Scope::Requires(fname)
                } else {
                    Scope::Ensures(fname)
                }
            }
            other => {
                return Err(self.err(
                    kw_span,
                    format!("expected ContractInv, Requires, or Ensures, found `{other}`"),
                ))
            }
        };
        self.scope = scope.clone();

        let pred = self.predicate()?;
        if *self.peek() != Tok::Eof {
            return Err(self.err(
                self.span(),
                format!("unexpected {} after predicate", self.peek().describe()),
            ));
        }
        check_kinds(self.file, self.contract, &scope, &pred)?;
        Ok(SpecStatement { label, scope, pred })
    }

    fn predicate(&mut self) -> PResult<Predicate> {
        let lhs = self.pred_side()?;
        if *self.peek() == Tok::Implies {
            let span = self.bump().span;
            let rhs = self.pred_side()?;
            if *self.peek() == Tok::Implies {
                return Err(self.err(self.span(), "implications do not nest"));
            }
            if matches!(lhs, Predicate::False) || matches!(rhs, Predicate::False) {
                return Err(self.err(span, "`false` cannot be an implication side"));
            }
            return Ok(Predicate::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    /// A uniform `&&`- or `||`-chain of atoms (or a single atom / `false`).
    fn pred_side(&mut self) -> PResult<Predicate> {
        let first = self.atom()?;
        match self.peek() {
            Tok::AndAnd => {
                let mut items = vec![first];
                while *self.peek() == Tok::AndAnd {
                    self.bump();
                    items.push(self.atom()?);
                }
                if *self.peek() == Tok::OrOr {
                    return Err(self.err(self.span(), "cannot mix `&&` and `||` in one side"));
                }
                Ok(Predicate::And(items))
            }
            Tok::OrOr => {
                let mut items = vec![first];
                while *self.peek() == Tok::OrOr {
                    self.bump();
                    items.push(self.atom()?);
                }
                if *self.peek() == Tok::AndAnd {
                    return Err(self.err(self.span(), "cannot mix `&&` and `||` in one side"));
                }
                Ok(Predicate::Or(items))
            }
            _ => Ok(first),
        }
    }

    fn atom(&mut self) -> PResult<Predicate> {
        if matches!(self.peek(), Tok::Ident(s) if s == "false") {
            self.bump();
            return Ok(Predicate::False);
        }
        let lhs = self.add_expr()?;
        let op = match self.peek() {
            Tok::EqEq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Gt => CmpOp::Gt,
            Tok::Le => CmpOp::Le,
            Tok::Ge => CmpOp::Ge,
            other => {
                return Err(self.err(
                    self.span(),
                    format!("expected comparison operator, found {}", other.describe()),
                ))
            }
        };
        self.bump();
        let rhs = self.add_expr()?;
        Ok(Predicate::Atom(op, lhs, rhs))
    }

    fn add_expr(&mut self) -> PResult<SpecExpr> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.mul_expr()?;
            lhs = SpecExpr::Arith(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn mul_expr(&mut self) -> PResult<SpecExpr> {
        let mut lhs = self.postfix_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Star => ArithOp::Mul,
                Tok::Slash => ArithOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.postfix_expr()?;
            lhs = SpecExpr::Arith(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn postfix_expr(&mut self) -> PResult<SpecExpr> {
        let mut e = self.primary_expr()?;
        loop {
            match self.peek() {
                Tok::LBracket => {
                    self.bump();
                    let idx = self.add_expr()?;
                    self.expect(Tok::RBracket)?;
                    e = SpecExpr::Index(Box::new(e), Box::new(idx));
                }
                Tok::Dot => {
                    self.bump();
                    let (name, _) = self.ident("member name")?;
                    e = SpecExpr::Member(Box::new(e), name);
                }
                _ => break,
            }
        }
        Ok(e)
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Span)> {
        match self.bump() {
            Token { tok: Tok::Ident(s), span } => Ok((s, span)),
            t => Err(self.err(t.span, format!("expected {what}, found {}", t.tok.describe()))),
        }
    }

    fn primary_expr(&mut self) -> PResult<SpecExpr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Number(n) => {
                self.bump();
                Ok(SpecExpr::Int(BigInt::from(n)))
            }
            Tok::Minus => {
                self.bump();
                match self.bump() {
                    Token { tok: Tok::Number(n), .. } => Ok(SpecExpr::Int(-BigInt::from(n))),
                    t => Err(self.err(t.span, "expected numeric literal after `-`")),
                }
            }
            Tok::StrLit(s) => {
                self.bump();
                Ok(SpecExpr::Str(s))
            }
            Tok::LParen => {
                self.bump();
                let e = self.add_expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "true" => Ok(SpecExpr::Bool(true)),
                    "false" => Err(self.err(span, "`false` is a predicate, not a value")),
                    "MAXVALUE" => Ok(SpecExpr::MaxValue),
                    "msg" => {
                        self.expect(Tok::Dot)?;
                        let (f, fs) = self.ident("`sender`")?;
                        if f != "sender" {
                            return Err(self.err(fs, "expected `msg.sender`"));
                        }
                        self.scoped_implicit(span, SpecExpr::MsgSender)
                    }
                    "block" => {
                        self.expect(Tok::Dot)?;
                        let (f, fs) = self.ident("`number`")?;
                        if f != "number" {
                            return Err(self.err(fs, "expected `block.number`"));
                        }
                        self.scoped_implicit(span, SpecExpr::BlockNumber)
                    }
                    "old" => {
                        self.expect(Tok::LParen)?;
                        let inner = self.add_expr()?;
                        self.expect(Tok::RParen)?;
                        if !matches!(self.scope, Scope::Ensures(_)) {
                            return Err(self.err(span, "`old` is only meaningful in Ensures scope"));
                        }
                        let mut found = false;
                        let marked = mark_pre(inner, &mut found);
                        if !found {
                            return Err(self.err(span, "`old` must cover a state variable"));
                        }
                        Ok(marked)
                    }
                    "len" => {
                        self.expect(Tok::LParen)?;
                        let inner = self.add_expr()?;
                        self.expect(Tok::RParen)?;
                        Ok(SpecExpr::Len(Box::new(inner)))
                    }
                    "SumMap" => {
                        self.expect(Tok::LParen)?;
                        let inner = self.add_expr()?;
                        self.expect(Tok::RParen)?;
                        Ok(SpecExpr::SumMap(Box::new(inner)))
                    }
                    _ => self.resolve_name(name, span),
                }
            }
            other => Err(self.err(
                span,
                format!("expected expression, found {}", other.describe()),
            )),
        }
    }

    fn scoped_implicit(&self, span: Span, e: SpecExpr) -> PResult<SpecExpr> {
        if self.scope == Scope::ContractInv {
            Err(self.err(span, "contract invariants cannot mention call context"))
        } else {
            Ok(e)
        }
    }

    fn resolve_name(&self, name: String, span: Span) -> PResult<SpecExpr> {
        // `a<k>` is reserved for address literals.
        if let Some(rest) = name.strip_prefix('a') {
            if !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit()) {
                let k = rest
                    .parse::<u64>()
                    .ok()
                    .and_then(|k| k.to_u32())
                    .ok_or_else(|| self.err(span, format!("address literal `{name}` out of range")))?;
                return Ok(SpecExpr::Addr(k));
            }
        }
        if self.contract.state_var(&name).is_some() {
            let phase = match self.scope {
                Scope::Ensures(_) => Phase::Post,
                _ => Phase::Pre,
            };
            return Ok(SpecExpr::StateVar { name, phase });
        }
        if let Some(f) = self.scope.function().and_then(|f| self.contract.function(f)) {
            if f.params.iter().any(|p| p.name == name) {
                return Ok(SpecExpr::Param(name));
            }
        }
        let where_ = match &self.scope {
            Scope::ContractInv => "contract scope".to_string(),
            Scope::Requires(f) | Scope::Ensures(f) => format!("scope of `{f}`"),
        };
        Err(self.err(span, format!("unknown name `{name}` in {where_}")))
    }
}

fn mark_pre(e: SpecExpr, found: &mut bool) -> SpecExpr {
    match e {
        SpecExpr::StateVar { name, .. } => {
            *found = true;
            SpecExpr::StateVar { name, phase: Phase::Pre }
        }
        SpecExpr::Len(i) => SpecExpr::Len(Box::new(mark_pre(*i, found))),
        SpecExpr::SumMap(i) => SpecExpr::SumMap(Box::new(mark_pre(*i, found))),
        SpecExpr::Index(c, i) => SpecExpr::Index(
            Box::new(mark_pre(*c, found)),
            Box::new(mark_pre(*i, found)),
        ),
        SpecExpr::Member(c, f) => SpecExpr::Member(Box::new(mark_pre(*c, found)), f),
        SpecExpr::Arith(op, l, r) => SpecExpr::Arith(
            op,
            Box::new(mark_pre(*l, found)),
            Box::new(mark_pre(*r, found)),
        ),
        other => other,
    }
}

/// Spec-level types. `uint` and `int` collapse to `Num`: specification
/// arithmetic is unbounded integer math.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecTy {
    Num,
    Bool,
    Addr,
    Str,
    Bytes,
    Array(Box<SpecTy>),
    Map(Box<SpecTy>, Box<SpecTy>),
    Struct(String),
}

impl SpecTy {
    pub fn of(ty: &Type) -> SpecTy {
        match ty {
            Type::Uint | Type::Int => SpecTy::Num,
            Type::Bool => SpecTy::Bool,
            Type::Address => SpecTy::Addr,
            Type::Str => SpecTy::Str,
            Type::Bytes => SpecTy::Bytes,
            Type::Array(e) => SpecTy::Array(Box::new(SpecTy::of(e))),
            Type::Mapping(k, v) => SpecTy::Map(Box::new(SpecTy::of(k)), Box::new(SpecTy::of(v))),
            Type::Struct(n) => SpecTy::Struct(n.clone()),
            Type::Unknown => unreachable!("unknown type survived type checking"),
        }
    }

    fn is_scalar(&self) -> bool {
        matches!(
            self,
            SpecTy::Num | SpecTy::Bool | SpecTy::Addr | SpecTy::Str | SpecTy::Bytes
        )
    }
}

/// Infers the spec-level type of `e` in `scope`, or explains why it is
/// ill-formed.
pub fn spec_type_of(
    contract: &Contract,
    scope: &Scope,
    e: &SpecExpr,
) -> Result<SpecTy, String> {
    match e {
        SpecExpr::Int(_) | SpecExpr::MaxValue | SpecExpr::BlockNumber => Ok(SpecTy::Num),
        SpecExpr::Bool(_) => Ok(SpecTy::Bool),
        SpecExpr::Addr(_) | SpecExpr::MsgSender => Ok(SpecTy::Addr),
        SpecExpr::Str(_) => Ok(SpecTy::Str),
        SpecExpr::StateVar { name, .. } => contract
            .state_var(name)
            .map(|v| SpecTy::of(&v.ty))
            .ok_or_else(|| format!("unknown state variable `{name}`")),
        SpecExpr::Param(name) => {
            let f = scope
                .function()
                .and_then(|f| contract.function(f))
                .ok_or_else(|| format!("parameter `{name}` outside function scope"))?;
            f.params
                .iter()
                .find(|p| p.name == *name)
                .map(|p| SpecTy::of(&p.ty))
                .ok_or_else(|| format!("unknown parameter `{name}`"))
        }
        SpecExpr::Len(inner) => {
            let t = spec_type_of(contract, scope, inner)?;
            match t {
                SpecTy::Map(..) | SpecTy::Array(_) | SpecTy::Bytes | SpecTy::Str => Ok(SpecTy::Num),
                other => Err(format!("len() needs a collection, found {other:?}")),
            }
        }
        SpecExpr::SumMap(inner) => {
            let t = spec_type_of(contract, scope, inner)?;
            match t {
                SpecTy::Map(_, v) if *v == SpecTy::Num => Ok(SpecTy::Num),
                other => Err(format!("SumMap() needs a numeric-valued mapping, found {other:?}")),
            }
        }
        SpecExpr::Index(c, i) => {
            let ct = spec_type_of(contract, scope, c)?;
            let it = spec_type_of(contract, scope, i)?;
            match ct {
                SpecTy::Map(k, v) => {
                    if *k == it {
                        Ok(*v)
                    } else {
                        Err(format!("mapping key type mismatch: {k:?} vs {it:?}"))
                    }
                }
                SpecTy::Array(elem) => {
                    if it == SpecTy::Num {
                        Ok(*elem)
                    } else {
                        Err("array index must be numeric".to_string())
                    }
                }
                other => Err(format!("{other:?} cannot be indexed")),
            }
        }
        SpecExpr::Member(c, field) => {
            let ct = spec_type_of(contract, scope, c)?;
            match ct {
                SpecTy::Struct(name) => contract
                    .struct_decl(&name)
                    .and_then(|d| d.fields.iter().find(|f| f.name == *field))
                    .map(|f| SpecTy::of(&f.ty))
                    .ok_or_else(|| format!("struct `{name}` has no field `{field}`")),
                other => Err(format!("{other:?} has no members")),
            }
        }
        SpecExpr::Arith(op, l, r) => {
            let lt = spec_type_of(contract, scope, l)?;
            let rt = spec_type_of(contract, scope, r)?;
            if lt == SpecTy::Num && rt == SpecTy::Num {
                Ok(SpecTy::Num)
            } else {
                Err(format!("`{}` needs numeric operands", op.symbol()))
            }
        }
    }
}

/// Scope and shape restrictions beyond what parsing enforces. Callers that
/// construct predicates programmatically use this to validate them.
pub fn check_kinds(
    file: &str,
    contract: &Contract,
    scope: &Scope,
    pred: &Predicate,
) -> Result<(), Diagnostic> {
    let fail = |msg: String| Diagnostic::error(file, Span::default(), msg);

    // Shape.
    match scope {
        Scope::Requires(_) | Scope::ContractInv => match pred {
            Predicate::False | Predicate::Atom(..) => {}
            _ => {
                return Err(fail(
                    "Requires and ContractInv predicates must be a single atom or `false`"
                        .to_string(),
                ))
            }
        },
        Scope::Ensures(_) => match pred {
            Predicate::False | Predicate::Atom(..) => {}
            Predicate::Implies(lhs, rhs) => {
                for side in [&**lhs, &**rhs] {
                    match side {
                        Predicate::Atom(..) => {}
                        Predicate::And(items) | Predicate::Or(items) => {
                            if !items.iter().all(|p| matches!(p, Predicate::Atom(..))) {
                                return Err(fail(
                                    "implication sides are flat chains of atoms".to_string(),
                                ));
                            }
                        }
                        _ => {
                            return Err(fail(
                                "implication sides are atoms or flat `&&`/`||` chains".to_string(),
                            ))
                        }
                    }
                }
            }
            _ => {
                return Err(fail(
                    "Ensures predicates are atoms, `false`, or one implication".to_string(),
                ))
            }
        },
    }

    // Phases and atom typing.
    for atom in pred.atoms() {
        let Predicate::Atom(op, lhs, rhs) = atom else {
            continue;
        };
        for side in [lhs, rhs] {
            check_phases(scope, side).map_err(&fail)?;
        }
        let lt = spec_type_of(contract, scope, lhs).map_err(&fail)?;
        let rt = spec_type_of(contract, scope, rhs).map_err(&fail)?;
        if lt != rt {
            return Err(fail(format!(
                "comparison operand types differ: {lt:?} vs {rt:?}"
            )));
        }
        match op {
            CmpOp::Lt | CmpOp::Gt | CmpOp::Le | CmpOp::Ge => {
                if lt != SpecTy::Num {
                    return Err(fail("ordering comparisons need numeric operands".to_string()));
                }
            }
            CmpOp::Eq | CmpOp::Ne => {
                if !lt.is_scalar() {
                    return Err(fail("equality needs scalar operands".to_string()));
                }
            }
        }
    }
    Ok(())
}

fn check_phases(scope: &Scope, e: &SpecExpr) -> Result<(), String> {
    match e {
        SpecExpr::StateVar { name, phase } => {
            if *phase == Phase::Post && !matches!(scope, Scope::Ensures(_)) {
                return Err(format!(
                    "state variable `{name}` cannot be post-state outside Ensures"
                ));
            }
            Ok(())
        }
        SpecExpr::MsgSender | SpecExpr::BlockNumber => {
            if *scope == Scope::ContractInv {
                Err("contract invariants cannot mention call context".to_string())
            } else {
                Ok(())
            }
        }
        SpecExpr::Param(name) => {
            if scope.function().is_none() {
                Err(format!("parameter `{name}` outside function scope"))
            } else {
                Ok(())
            }
        }
        SpecExpr::Len(i) | SpecExpr::SumMap(i) => check_phases(scope, i),
        SpecExpr::Index(c, i) => {
            check_phases(scope, c)?;
            check_phases(scope, i)
        }
        SpecExpr::Member(c, _) => check_phases(scope, c),
        SpecExpr::Arith(_, l, r) => {
            check_phases(scope, l)?;
            check_phases(scope, r)
        }
        _ => Ok(()),
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
                    return true;
                }
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn parses_all_statement_forms() {
        let c = token();
        let spec = parse_spec(
            "g.spec",
            r#"# ground truth
ContractInv SumMap(balances) == totalSupply
[r1] Requires transferFrom: tokens <= balances[from]
Ensures transferFrom: to != a0 ==> balances[to] == old(balances[to]) + tokens
Ensures transferFrom: from != to && to != a0 ==> balances[from] == old(balances[from]) - tokens
"#,
            &c,
        )
        .unwrap();
        assert_eq!(spec.statements.len(), 4);
        assert_eq!(spec.statements[0].scope, Scope::ContractInv);
        assert_eq!(spec.statements[1].label.as_deref(), Some("r1"));
        assert!(matches!(spec.statements[2].pred, Predicate::Implies(..)));
    }

    #[test]
    fn old_marks_state_pre_and_keeps_params() {
        let c = token();
        let st = parse_statement(
            "g.spec",
            "Ensures transferFrom: old(balances[from]) >= tokens",
            &c,
        )
        .unwrap();
        match &st.pred {
            Predicate::Atom(CmpOp::Ge, lhs, rhs) => {
                assert_eq!(
                    *lhs,
                    SpecExpr::Index(
                        Box::new(SpecExpr::StateVar {
                            name: "balances".into(),
                            phase: Phase::Pre
                        }),
                        Box::new(SpecExpr::Param("from".into()))
                    )
                );
                assert_eq!(*rhs, SpecExpr::Param("tokens".into()));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bare_state_var_is_post_in_ensures_pre_elsewhere() {
        let c = token();
        let e = parse_statement("s", "Ensures transferFrom: totalSupply == 100", &c).unwrap();
        match &e.pred {
            Predicate::Atom(_, SpecExpr::StateVar { phase, .. }, _) => {
                assert_eq!(*phase, Phase::Post)
            }
            other => panic!("unexpected {other:?}"),
        }
        let r = parse_statement("s", "Requires transferFrom: totalSupply == 100", &c).unwrap();
        match &r.pred {
            Predicate::Atom(_, SpecExpr::StateVar { phase, .. }, _) => {
                assert_eq!(*phase, Phase::Pre)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_old_outside_ensures() {
        let c = token();
        let err = parse_statement("s", "Requires transferFrom: old(totalSupply) == 100", &c)
            .unwrap_err();
        assert!(err.to_string().contains("only meaningful in Ensures"), "{err}");
    }

    #[test]
    fn rejects_implication_in_requires() {
        let c = token();
        let err = parse_statement("s", "Requires transferFrom: tokens == 0 ==> tokens == 0", &c)
            .unwrap_err();
        assert!(err.to_string().contains("single atom"), "{err}");
    }

    #[test]
    fn rejects_unknown_names_and_context_in_inv() {
        let c = token();
        let err = parse_statement("s", "Ensures transferFrom: bogus == 1", &c).unwrap_err();
        assert!(err.to_string().contains("unknown name `bogus`"), "{err}");
        let err2 = parse_statement("s", "ContractInv tokens == 1", &c).unwrap_err();
        assert!(err2.to_string().contains("unknown name `tokens`"), "{err2}");
        let err3 = parse_statement("s", "ContractInv msg.sender != a0", &c).unwrap_err();
        assert!(err3.to_string().contains("call context"), "{err3}");
    }

    #[test]
    fn rejects_type_mismatches() {
        let c = token();
        let err = parse_statement("s", "Ensures transferFrom: from < to", &c).unwrap_err();
        assert!(err.to_string().contains("numeric operands"), "{err}");
        let err2 = parse_statement("s", "Ensures transferFrom: SumMap(allows) == 0", &c)
            .unwrap_err();
        assert!(err2.to_string().contains("numeric-valued mapping"), "{err2}");
        let err3 = parse_statement("s", "Ensures transferFrom: to == tokens", &c).unwrap_err();
        assert!(err3.to_string().contains("types differ"), "{err3}");
    }

    #[test]
    fn rejects_mixed_connectives() {
        let c = token();
        let err = parse_statement(
            "s",
            "Ensures transferFrom: to != a0 && from != to || tokens == 0 ==> tokens == 0",
            &c,
        )
        .unwrap_err();
        assert!(err.to_string().contains("mix"), "{err}");
    }

    #[test]
    fn address_literals_are_reserved() {
        let c = token();
        let st = parse_statement("s", "Ensures transferFrom: to != a0", &c).unwrap();
        match &st.pred {
            Predicate::Atom(CmpOp::Ne, SpecExpr::Param(p), SpecExpr::Addr(0)) => {
                assert_eq!(p, "to")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn maxvalue_parses() {
        let c = token();
        let st = parse_statement(
            "s",
            "Ensures transferFrom: balances[to] + tokens <= MAXVALUE",
            &c,
        )
        .unwrap();
        assert!(matches!(
            st.pred,
            Predicate::Atom(CmpOp::Le, _, SpecExpr::MaxValue)
        ));
    }
}

