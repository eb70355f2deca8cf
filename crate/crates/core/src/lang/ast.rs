//! Abstract syntax for the contract language.

use crate::diag::Span;
use num_bigint::BigUint;
use std::fmt;

/// Type of a declaration or expression.
///
/// `uint` and `int` do not carry a width in source; the machine width is a
/// runtime configuration shared by the whole contract.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Type {
    Uint,
    Int,
    Bool,
    Address,
    Str,
    Bytes,
    Array(Box<Type>),
    /// Key type is restricted to `Address` or `Uint`.
    Mapping(Box<Type>, Box<Type>),
    Struct(String),
    /// Placeholder before type checking.
    Unknown,
}

impl Type {
    pub fn is_numeric(&self) -> bool {
        matches!(self, Type::Uint | Type::Int)
    }

    /// Types a public function parameter or return value may have.
    pub fn is_value_type(&self) -> bool {
        match self {
            Type::Uint | Type::Int | Type::Bool | Type::Address | Type::Str | Type::Bytes => true,
            Type::Array(elem) => elem.is_value_type(),
            Type::Mapping(..) | Type::Struct(_) | Type::Unknown => false,
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Uint => write!(f, "uint"),
            Type::Int => write!(f, "int"),
            Type::Bool => write!(f, "bool"),
            Type::Address => write!(f, "address"),
            Type::Str => write!(f, "string"),
            Type::Bytes => write!(f, "bytes"),
            Type::Array(elem) => write!(f, "{elem}[]"),
            Type::Mapping(k, v) => write!(f, "mapping({k} => {v})"),
            Type::Struct(name) => write!(f, "{name}"),
            Type::Unknown => write!(f, "<unknown>"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Visibility {
    Public,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub ty: Type,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructDecl {
    pub name: String,
    pub fields: Vec<VarDecl>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Function {
    pub name: String,
    pub visibility: Visibility,
    pub params: Vec<VarDecl>,
    pub returns: Option<Type>,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Contract {
    pub name: String,
    pub structs: Vec<StructDecl>,
    pub state_vars: Vec<VarDecl>,
    pub constructor: Option<Function>,
    pub functions: Vec<Function>,
}

impl Contract {
    pub fn function(&self, name: &str) -> Option<&Function> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn state_var(&self, name: &str) -> Option<&VarDecl> {
        self.state_vars.iter().find(|v| v.name == name)
    }

    pub fn struct_decl(&self, name: &str) -> Option<&StructDecl> {
        self.structs.iter().find(|s| s.name == name)
    }

    pub fn public_functions(&self) -> impl Iterator<Item = &Function> {
        self.functions
            .iter()
            .filter(|f| f.visibility == Visibility::Public)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    /// `uint x;` or `uint x = e;`
    Local {
        name: String,
        ty: Type,
        init: Option<Expr>,
    },
    Assign {
        target: LValue,
        value: Expr,
    },
    If {
        cond: Expr,
        then_branch: Vec<Stmt>,
        else_branch: Vec<Stmt>,
    },
    /// `for (init; cond; update) { body }`; iteration counts are bounded by
    /// the interpreter's fuel and the verifier's unroll limit.
    For {
        init: Box<Stmt>,
        cond: Expr,
        update: Box<Stmt>,
        body: Vec<Stmt>,
    },
    Require(Expr),
    Assert(Expr),
    Revert,
    Return(Option<Expr>),
    /// Internal call in statement position, result discarded.
    Call {
        callee: String,
        args: Vec<Expr>,
    },
}

/// Assignment target: a variable followed by index/member accessors.
///
/// Equality ignores `span`, matching [`Expr`].
#[derive(Debug, Clone)]
pub struct LValue {
    pub base: String,
    pub accessors: Vec<Accessor>,
    pub span: Span,
}

impl PartialEq for LValue {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base && self.accessors == other.accessors
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Accessor {
    Index(Expr),
    Member(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn is_arithmetic(&self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div)
    }

    pub fn is_comparison(&self) -> bool {
        matches!(self, BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge)
    }

    pub fn is_equality(&self) -> bool {
        matches!(self, BinOp::Eq | BinOp::Ne)
    }

    pub fn is_logical(&self) -> bool {
        matches!(self, BinOp::And | BinOp::Or)
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
            BinOp::Le => "<=",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }
}

/// Expression node.
///
/// Equality ignores `span` and the cached `ty`: both are derived metadata,
/// so two expressions are equal when their structure is.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub ty: Type,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr {
            kind,
            ty: Type::Unknown,
            span,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Number(BigUint),
    Bool(bool),
    Str(String),
    /// `address(k)` literal; `k` indexes the configured address domain.
    AddrLit(u32),
    /// Local, parameter, or state variable.
    Var(String),
    MsgSender,
    BlockNumber,
    Index(Box<Expr>, Box<Expr>),
    Member(Box<Expr>, String),
    /// `e.length` on arrays.
    Length(Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// `unchecked(e)`: arithmetic inside wraps modulo 2^width.
    Unchecked(Box<Expr>),
    /// Internal call in expression position.
    Call { callee: String, args: Vec<Expr> },
}
