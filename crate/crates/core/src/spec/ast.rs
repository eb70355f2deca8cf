//! Abstract syntax for the invariant specification language.

use num_bigint::BigInt;

/// Which state a state-variable reference reads. In `Ensures` scope a bare
/// state variable is post-state and `old(x)` is pre-state; `Requires` and
/// `ContractInv` predicates are single-state and use `Pre` throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Pre,
    Post,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SpecExpr {
    /// Numeric literal; spec arithmetic is unbounded integer math.
    Int(BigInt),
    Bool(bool),
    /// Address literal `a<k>`.
    Addr(u32),
    Str(String),
    /// Largest `uint` value for the configured width.
    MaxValue,
    StateVar { name: String, phase: Phase },
    Param(String),
    MsgSender,
    BlockNumber,
    /// Entry count of a mapping, element count of an array, byte/char count
    /// of bytes/string.
    Len(Box<SpecExpr>),
    /// Sum of a numeric-valued mapping's entries.
    SumMap(Box<SpecExpr>),
    Index(Box<SpecExpr>, Box<SpecExpr>),
    Member(Box<SpecExpr>, String),
    Arith(ArithOp, Box<SpecExpr>, Box<SpecExpr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
}

impl CmpOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
        }
    }

    pub fn negated(&self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Ge => CmpOp::Lt,
        }
    }
}

/// `Requires` and `ContractInv` predicates are primitive: `false` or one
/// atom. `Ensures` predicates may additionally be an implication whose sides
/// are uniform conjunctions or disjunctions of atoms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Predicate {
    False,
    Atom(CmpOp, SpecExpr, SpecExpr),
    And(Vec<Predicate>),
    Or(Vec<Predicate>),
    Implies(Box<Predicate>, Box<Predicate>),
}

impl Predicate {
    pub fn atom(op: CmpOp, lhs: SpecExpr, rhs: SpecExpr) -> Predicate {
        Predicate::Atom(op, lhs, rhs)
    }

    /// All atoms, in order.
    pub fn atoms(&self) -> Vec<&Predicate> {
        match self {
            Predicate::False => Vec::new(),
            Predicate::Atom(..) => vec![self],
            Predicate::And(ps) | Predicate::Or(ps) => ps.iter().flat_map(|p| p.atoms()).collect(),
            Predicate::Implies(a, b) => {
                let mut v = a.atoms();
                v.extend(b.atoms());
                v
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scope {
    ContractInv,
    Requires(String),
    Ensures(String),
}

impl Scope {
    pub fn function(&self) -> Option<&str> {
        match self {
            Scope::ContractInv => None,
            Scope::Requires(f) | Scope::Ensures(f) => Some(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecStatement {
    pub label: Option<String>,
    pub scope: Scope,
    pub pred: Predicate,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SpecFile {
    pub statements: Vec<SpecStatement>,
}
