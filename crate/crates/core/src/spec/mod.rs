//! The invariant specification language: contract invariants,
//! preconditions, and postconditions over execution records.

pub mod ast;
pub mod eval;
pub mod parser;
pub mod print;

pub use ast::{
    ArithOp, CmpOp, Phase, Predicate, Scope, SpecExpr, SpecFile, SpecStatement,
};
pub use eval::{Bool3, EvalCtx};
pub use parser::{check_kinds, parse_spec, parse_statement, spec_type_of, SpecTy};
pub use print::{canonical_key, print_expr, print_pred, print_spec_file, print_statement};
