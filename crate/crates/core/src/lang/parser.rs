//! Recursive-descent parser for the contract language.
//!
//! Surface sugar is resolved here so later stages see a small core syntax:
//! `a.add(b)` / `.sub` / `.mul` / `.div` become checked binary operators,
//! `e.length` becomes [`ExprKind::Length`], `address(k)` becomes an address
//! literal, and `i++` becomes `i = i + 1`.

use super::ast::*;
use crate::diag::{Diagnostic, Span};
use crate::lexer::{tokenize, Tok, Token};
use num_bigint::BigUint;
use num_traits::ToPrimitive;

pub struct Parser<'a> {
    file: &'a str,
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, Diagnostic>;

/// Parses source text into an untyped contract AST.
///
/// Most callers want [`super::parse_contract`], which also type-checks.
pub fn parse_contract_source(file: &str, src: &str) -> PResult<Contract> {
    let toks = tokenize(file, src)?;
    let mut p = Parser { file, toks, pos: 0 };
    let contract = p.contract()?;
    p.expect_eof()?;
    Ok(contract)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, off: usize) -> &Tok {
        let idx = (self.pos + off).min(self.toks.len() - 1);
        &self.toks[idx].tok
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

    fn expect_ident(&mut self, what: &str) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let sp = self.span();
                self.bump();
                Ok((s, sp))
            }
            other => Err(self.err(
                self.span(),
                format!("expected {what}, found {}", other.describe()),
            )),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<Span> {
        match self.peek() {
            Tok::Ident(s) if s == kw => Ok(self.bump().span),
            other => Err(self.err(
                self.span(),
                format!("expected `{kw}`, found {}", other.describe()),
            )),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_eof(&mut self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.err(
                self.span(),
                format!("expected end of input, found {}", self.peek().describe()),
            ))
        }
    }

    fn contract(&mut self) -> PResult<Contract> {
        self.expect_keyword("contract")?;
        let (name, _) = self.expect_ident("contract name")?;
        self.expect(Tok::LBrace)?;
        let mut contract = Contract {
            name,
            structs: Vec::new(),
            state_vars: Vec::new(),
            constructor: None,
            functions: Vec::new(),
        };
        while *self.peek() != Tok::RBrace {
            if self.at_keyword("struct") {
                contract.structs.push(self.struct_decl()?);
            } else if self.at_keyword("function") || self.at_keyword("constructor") {
                let span = self.span();
                let f = self.function()?;
                if f.name == "constructor" {
                    if contract.constructor.is_some() {
                        return Err(self.err(span, "duplicate constructor"));
                    }
                    contract.constructor = Some(f);
                } else {
                    contract.functions.push(f);
                }
            } else {
                let ty = self.type_expr()?;
                let (name, _) = self.expect_ident("state variable name")?;
                self.expect(Tok::Semi)?;
                contract.state_vars.push(VarDecl { name, ty });
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(contract)
    }

    fn struct_decl(&mut self) -> PResult<StructDecl> {
        self.expect_keyword("struct")?;
        let (name, _) = self.expect_ident("struct name")?;
        self.expect(Tok::LBrace)?;
        let mut fields = Vec::new();
        while *self.peek() != Tok::RBrace {
            let ty = self.type_expr()?;
            let (fname, _) = self.expect_ident("field name")?;
            self.expect(Tok::Semi)?;
            fields.push(VarDecl { name: fname, ty });
        }
        self.expect(Tok::RBrace)?;
        Ok(StructDecl { name, fields })
    }

    fn function(&mut self) -> PResult<Function> {
        let name = if self.at_keyword("constructor") {
            self.bump();
            "constructor".to_string()
        } else {
            self.expect_keyword("function")?;
            self.expect_ident("function name")?.0
        };
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let ty = self.type_expr()?;
                let (pname, _) = self.expect_ident("parameter name")?;
                params.push(VarDecl { name: pname, ty });
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;

        let mut visibility = Visibility::Public;
        if self.at_keyword("public") {
            self.bump();
        } else if self.at_keyword("internal") {
            self.bump();
            visibility = Visibility::Internal;
        }

        let mut returns = None;
        if self.at_keyword("returns") {
            self.bump();
            self.expect(Tok::LParen)?;
            let ty = self.type_expr()?;
            // An optional name for the return value is accepted and dropped;
            // the language has no named-return assignment form.
            if let Tok::Ident(_) = self.peek() {
                self.bump();
            }
            self.expect(Tok::RParen)?;
            returns = Some(ty);
        }

        let body = self.block()?;
        Ok(Function {
            name,
            visibility,
            params,
            returns,
            body,
        })
    }

    fn type_expr(&mut self) -> PResult<Type> {
        let base = match self.peek().clone() {
            Tok::Ident(s) => match s.as_str() {
                "uint" => {
                    self.bump();
                    Type::Uint
                }
                "int" => {
                    self.bump();
                    Type::Int
                }
                "bool" => {
                    self.bump();
                    Type::Bool
                }
                "address" => {
                    self.bump();
                    Type::Address
                }
                "string" => {
                    self.bump();
                    Type::Str
                }
                "bytes" => {
                    self.bump();
                    Type::Bytes
                }
                "mapping" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let key = self.type_expr()?;
                    self.expect(Tok::Arrow)?;
                    let val = self.type_expr()?;
                    self.expect(Tok::RParen)?;
                    Type::Mapping(Box::new(key), Box::new(val))
                }
                _ => {
                    self.bump();
                    Type::Struct(s)
                }
            },
            other => {
                return Err(self.err(
                    self.span(),
                    format!("expected type, found {}", other.describe()),
                ))
            }
        };
        let mut ty = base;
        while *self.peek() == Tok::LBracket && *self.peek_at(1) == Tok::RBracket {
            self.bump();
            self.bump();
            ty = Type::Array(Box::new(ty));
        }
        Ok(ty)
    }

    /// True when the upcoming tokens start a local declaration rather than an
    /// assignment or call. `Ident Ident`, `Ident [] ...`, and the builtin type
    /// keywords all begin declarations.
    fn at_local_decl(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => match s.as_str() {
                "uint" | "int" | "bool" | "string" | "bytes" | "mapping" => true,
                // `address(0)` is an expression; `address x` is a declaration.
                "address" => *self.peek_at(1) != Tok::LParen,
                _ => {
                    matches!(self.peek_at(1), Tok::Ident(_))
                        || (*self.peek_at(1) == Tok::LBracket && *self.peek_at(2) == Tok::RBracket)
                }
            },
            _ => false,
        }
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect(Tok::LBrace)?;
        let mut stmts = Vec::new();
        while *self.peek() != Tok::RBrace {
            stmts.push(self.stmt()?);
        }
        self.expect(Tok::RBrace)?;
        Ok(stmts)
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        if self.at_keyword("if") {
            return self.if_stmt();
        }
        if self.at_keyword("for") {
            return self.for_stmt();
        }
        if self.at_keyword("require") || self.at_keyword("assert") {
            let is_require = self.at_keyword("require");
            self.bump();
            self.expect(Tok::LParen)?;
            let cond = self.expr()?;
            self.expect(Tok::RParen)?;
            self.expect(Tok::Semi)?;
            return Ok(if is_require {
                Stmt::Require(cond)
            } else {
                Stmt::Assert(cond)
            });
        }
        if self.at_keyword("revert") {
            self.bump();
            if *self.peek() == Tok::LParen {
                self.bump();
                self.expect(Tok::RParen)?;
            }
            self.expect(Tok::Semi)?;
            return Ok(Stmt::Revert);
        }
        if self.at_keyword("return") {
            self.bump();
            let value = if *self.peek() == Tok::Semi {
                None
            } else {
                Some(self.expr()?)
            };
            self.expect(Tok::Semi)?;
            return Ok(Stmt::Return(value));
        }
        if self.at_local_decl() {
            let stmt = self.local_decl()?;
            self.expect(Tok::Semi)?;
            return Ok(stmt);
        }
        let stmt = self.assign_or_call()?;
        self.expect(Tok::Semi)?;
        Ok(stmt)
    }

    fn local_decl(&mut self) -> PResult<Stmt> {
        let ty = self.type_expr()?;
        let (name, _) = self.expect_ident("variable name")?;
        let init = if *self.peek() == Tok::Assign {
            self.bump();
            Some(self.expr()?)
        } else {
            None
        };
        Ok(Stmt::Local { name, ty, init })
    }

    /// Assignment, increment, or internal call, without the trailing `;`.
    fn assign_or_call(&mut self) -> PResult<Stmt> {
        let (base, base_span) = self.expect_ident("statement")?;

        if *self.peek() == Tok::LParen {
            self.bump();
            let args = self.call_args()?;
            return Ok(Stmt::Call { callee: base, args });
        }

        let mut accessors = Vec::new();
        loop {
            match self.peek() {
                Tok::LBracket => {
                    self.bump();
                    let idx = self.expr()?;
                    self.expect(Tok::RBracket)?;
                    accessors.push(Accessor::Index(idx));
                }
                Tok::Dot => {
                    self.bump();
                    let (field, _) = self.expect_ident("member name")?;
                    accessors.push(Accessor::Member(field));
                }
                _ => break,
            }
        }
        let target = LValue {
            base,
            accessors,
            span: base_span,
        };

        match self.peek() {
            Tok::Assign => {
                self.bump();
                let value = self.expr()?;
                Ok(Stmt::Assign { target, value })
            }
            Tok::PlusPlus => {
                self.bump();
                Ok(Stmt::Assign {
                    value: incremented(&target),
                    target,
                })
            }
            other => Err(self.err(
                self.span(),
                format!("expected `=` or `++`, found {}", other.describe()),
            )),
        }
    }

    fn if_stmt(&mut self) -> PResult<Stmt> {
        self.expect_keyword("if")?;
        self.expect(Tok::LParen)?;
        let cond = self.expr()?;
        self.expect(Tok::RParen)?;
        let then_branch = self.block()?;
        let else_branch = if self.at_keyword("else") {
            self.bump();
            if self.at_keyword("if") {
                vec![self.if_stmt()?]
            } else {
                self.block()?
            }
        } else {
            Vec::new()
        };
        Ok(Stmt::If {
            cond,
            then_branch,
            else_branch,
        })
    }

    fn for_stmt(&mut self) -> PResult<Stmt> {
        self.expect_keyword("for")?;
        self.expect(Tok::LParen)?;
        let init = if self.at_local_decl() {
            self.local_decl()?
        } else {
            self.assign_or_call()?
        };
        self.expect(Tok::Semi)?;
        let cond = self.expr()?;
        self.expect(Tok::Semi)?;
        let update = self.assign_or_call()?;
        self.expect(Tok::RParen)?;
        let body = self.block()?;
        Ok(Stmt::For {
            init: Box::new(init),
            cond,
            update: Box::new(update),
            body,
        })
    }

    fn call_args(&mut self) -> PResult<Vec<Expr>> {
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                args.push(self.expr()?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        Ok(args)
    }

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.and_expr()?;
        while *self.peek() == Tok::OrOr {
            let span = self.bump().span;
            let rhs = self.and_expr()?;
            lhs = Expr::new(ExprKind::Binary(BinOp::Or, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.cmp_expr()?;
        while *self.peek() == Tok::AndAnd {
            let span = self.bump().span;
            let rhs = self.cmp_expr()?;
            lhs = Expr::new(ExprKind::Binary(BinOp::And, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn cmp_expr(&mut self) -> PResult<Expr> {
        let lhs = self.add_expr()?;
        let op = match self.peek() {
            Tok::Lt => BinOp::Lt,
            Tok::Gt => BinOp::Gt,
            Tok::Le => BinOp::Le,
            Tok::Ge => BinOp::Ge,
            Tok::EqEq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            _ => return Ok(lhs),
        };
        let span = self.bump().span;
        let rhs = self.add_expr()?;
        Ok(Expr::new(
            ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
            span,
        ))
    }

    fn add_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            let span = self.bump().span;
            let rhs = self.mul_expr()?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn mul_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            let span = self.bump().span;
            let rhs = self.unary_expr()?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn unary_expr(&mut self) -> PResult<Expr> {
        if *self.peek() == Tok::Bang {
            let span = self.bump().span;
            let inner = self.unary_expr()?;
            return Ok(Expr::new(ExprKind::Unary(UnOp::Not, Box::new(inner)), span));
        }
        self.postfix_expr()
    }

    fn postfix_expr(&mut self) -> PResult<Expr> {
        let mut expr = self.primary_expr()?;
        loop {
            match self.peek() {
                Tok::LBracket => {
                    let span = self.bump().span;
                    let idx = self.expr()?;
                    self.expect(Tok::RBracket)?;
                    expr = Expr::new(ExprKind::Index(Box::new(expr), Box::new(idx)), span);
                }
                Tok::Dot => {
                    let span = self.bump().span;
                    let (name, name_span) = self.expect_ident("member name")?;
                    if *self.peek() == Tok::LParen {
                        self.bump();
                        let args = self.call_args()?;
                        let op = match name.as_str() {
                            "add" => BinOp::Add,
                            "sub" => BinOp::Sub,
                            "mul" => BinOp::Mul,
                            "div" => BinOp::Div,
                            _ => {
                                return Err(self.err(
                                    name_span,
                                    format!("unknown method `{name}`; expected add, sub, mul, or div"),
                                ))
                            }
                        };
                        if args.len() != 1 {
                            return Err(self.err(
                                name_span,
                                format!("`{name}` takes exactly one argument"),
                            ));
                        }
                        let rhs = args.into_iter().next().expect("length checked above");
                        expr = Expr::new(
                            ExprKind::Binary(op, Box::new(expr), Box::new(rhs)),
                            span,
                        );
                    } else if name == "length" {
                        expr = Expr::new(ExprKind::Length(Box::new(expr)), span);
                    } else {
                        expr = Expr::new(ExprKind::Member(Box::new(expr), name), span);
                    }
                }
                _ => break,
            }
        }
        Ok(expr)
    }

    fn primary_expr(&mut self) -> PResult<Expr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Number(n) => {
                self.bump();
                Ok(Expr::new(ExprKind::Number(n), span))
            }
            Tok::StrLit(s) => {
                self.bump();
                Ok(Expr::new(ExprKind::Str(s), span))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "true" => {
                    self.bump();
                    Ok(Expr::new(ExprKind::Bool(true), span))
                }
                "false" => {
                    self.bump();
                    Ok(Expr::new(ExprKind::Bool(false), span))
                }
                "unchecked" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let inner = self.expr()?;
                    self.expect(Tok::RParen)?;
                    Ok(Expr::new(ExprKind::Unchecked(Box::new(inner)), span))
                }
                "address" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let idx_span = self.span();
                    let idx = match self.peek().clone() {
                        Tok::Number(n) => {
                            self.bump();
                            n
                        }
                        other => {
                            return Err(self.err(
                                idx_span,
                                format!(
                                    "expected address index literal, found {}",
                                    other.describe()
                                ),
                            ))
                        }
                    };
                    self.expect(Tok::RParen)?;
                    let k = idx.to_u32().ok_or_else(|| {
                        self.err(idx_span, "address index literal out of range")
                    })?;
                    Ok(Expr::new(ExprKind::AddrLit(k), span))
                }
                "msg" => {
                    self.bump();
                    self.expect(Tok::Dot)?;
                    self.expect_keyword("sender")?;
                    Ok(Expr::new(ExprKind::MsgSender, span))
                }
                "block" => {
                    self.bump();
                    self.expect(Tok::Dot)?;
                    self.expect_keyword("number")?;
                    Ok(Expr::new(ExprKind::BlockNumber, span))
                }
                _ => {
                    self.bump();
                    if *self.peek() == Tok::LParen {
                        self.bump();
                        let args = self.call_args()?;
                        Ok(Expr::new(ExprKind::Call { callee: name, args }, span))
                    } else {
                        Ok(Expr::new(ExprKind::Var(name), span))
                    }
                }
            },
            other => Err(self.err(
                span,
                format!("expected expression, found {}", other.describe()),
            )),
        }
    }
}

/// Builds the `x + 1` expression for desugaring `x++`.
fn incremented(target: &LValue) -> Expr {
    let mut base = Expr::new(ExprKind::Var(target.base.clone()), target.span);
    for acc in &target.accessors {
        base = match acc {
            Accessor::Index(i) => Expr::new(
                ExprKind::Index(Box::new(base), Box::new(i.clone())),
                target.span,
            ),
            Accessor::Member(m) => {
                Expr::new(ExprKind::Member(Box::new(base), m.clone()), target.span)
            }
        };
    }
    Expr::new(
        ExprKind::Binary(
            BinOp::Add,
            Box::new(base),
            Box::new(Expr::new(ExprKind::Number(BigUint::from(1u32)), target.span)),
        ),
        target.span,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(src: &str) -> Contract {
        parse_contract_source("test.mc", src).unwrap()
    }

    #[test]
    fn token_contract_shape() {
        let c = parse(
            r#"
contract ERC20Mini {
    uint totalSupply;
    mapping(address => uint) balances;
    mapping(address => mapping(address => uint)) allows;

    function transferFrom(address from, address to, uint tokens) public returns (bool) {
        if (to == address(0)) {
            return false;
        }
        allows[from][msg.sender] = allows[from][msg.sender].sub(tokens);
        balances[from] = balances[from].sub(tokens);
        balances[to] = balances[to].add(tokens);
        return true;
    }
}
"#,
        );
        assert_eq!(c.name, "ERC20Mini");
        assert_eq!(c.state_vars.len(), 3);
        assert_eq!(c.functions.len(), 1);
        let f = &c.functions[0];
        assert_eq!(f.params.len(), 3);
        assert_eq!(f.returns, Some(Type::Bool));
        assert_eq!(f.body.len(), 5);
    }

    #[test]
    fn safemath_sugar_becomes_checked_ops() {
        let c = parse(
            "contract C { uint x; function f(uint a) public { x = x.add(a); x = x.sub(a); x = x.mul(a); x = x.div(a); } }",
        );
        let ops: Vec<BinOp> = c.functions[0]
            .body
            .iter()
            .map(|s| match s {
                Stmt::Assign { value, .. } => match &value.kind {
                    ExprKind::Binary(op, lhs, rhs) => {
                        assert_eq!(lhs.kind, ExprKind::Var("x".into()));
                        assert_eq!(rhs.kind, ExprKind::Var("a".into()));
                        *op
                    }
                    other => panic!("expected binary, got {other:?}"),
                },
                other => panic!("expected assignment, got {other:?}"),
            })
            .collect();
        assert_eq!(ops, vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div]);
    }

    #[test]
    fn increment_desugars_to_assignment() {
        let c = parse("contract C { uint n; function f() public { n++; } }");
        let expected = parse("contract C { uint n; function f() public { n = n + 1; } }");
        assert_eq!(c.functions[0].body, expected.functions[0].body);
    }

    #[test]
    fn for_loop_with_increment_update() {
        let c = parse(
            "contract C { uint s; function f(uint n) public { for (uint i = 0; i < n; i++) { s = s + i; } } }",
        );
        match &c.functions[0].body[0] {
            Stmt::For { init, cond, update, body } => {
                assert!(matches!(**init, Stmt::Local { .. }));
                assert!(matches!(cond.kind, ExprKind::Binary(BinOp::Lt, ..)));
                assert!(matches!(**update, Stmt::Assign { .. }));
                assert_eq!(body.len(), 1);
            }
            other => panic!("expected for, got {other:?}"),
        }
    }

    #[test]
    fn address_literal_and_msg_sender() {
        let c = parse(
            "contract C { address owner; function f() public { if (msg.sender == address(0)) { revert; } owner = msg.sender; } }",
        );
        match &c.functions[0].body[0] {
            Stmt::If { cond, .. } => match &cond.kind {
                ExprKind::Binary(BinOp::Eq, lhs, rhs) => {
                    assert_eq!(lhs.kind, ExprKind::MsgSender);
                    assert_eq!(rhs.kind, ExprKind::AddrLit(0));
                }
                other => panic!("unexpected condition {other:?}"),
            },
            other => panic!("expected if, got {other:?}"),
        }
    }

    #[test]
    fn unchecked_wraps_subtree() {
        let c = parse("contract C { uint x; function f(uint a, uint b) public { x = unchecked(a * b); } }");
        match &c.functions[0].body[0] {
            Stmt::Assign { value, .. } => {
                assert!(matches!(value.kind, ExprKind::Unchecked(_)))
            }
            other => panic!("expected assign, got {other:?}"),
        }
    }

    #[test]
    fn precedence_arithmetic_over_comparison_over_logical() {
        let c = parse("contract C { bool b; function f(uint x, uint y) public { b = x + 1 < y && y < 10 || b; } }");
        match &c.functions[0].body[0] {
            Stmt::Assign { value, .. } => match &value.kind {
                ExprKind::Binary(BinOp::Or, lhs, _) => match &lhs.kind {
                    ExprKind::Binary(BinOp::And, l, _) => {
                        assert!(matches!(l.kind, ExprKind::Binary(BinOp::Lt, ..)));
                    }
                    other => panic!("expected &&, got {other:?}"),
                },
                other => panic!("expected ||, got {other:?}"),
            },
            other => panic!("expected assign, got {other:?}"),
        }
    }

    #[test]
    fn error_message_carries_position() {
        let err = parse_contract_source("bad.mc", "contract C { uint x; function f() public { x = ; } }")
            .unwrap_err();
        assert_eq!(
            err.to_string(),
            "bad.mc:1:48: error: expected expression, found `;`"
        );
    }

    #[test]
    fn struct_and_array_declarations() {
        let c = parse(
            "contract C { struct Pair { uint a; uint b; } Pair p; uint[] xs; function f() public { p.a = xs.length; } }",
        );
        assert_eq!(c.structs.len(), 1);
        assert_eq!(c.state_vars[0].ty, Type::Struct("Pair".into()));
        assert_eq!(c.state_vars[1].ty, Type::Array(Box::new(Type::Uint)));
    }
}
