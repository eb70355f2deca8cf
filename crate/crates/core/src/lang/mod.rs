//! Contract language: syntax, parsing, type checking, printing, and the
//! per-function dependence relation.

pub mod ast;
pub mod deps;
pub mod parser;
pub mod print;
pub mod typeck;

pub use ast::{Contract, Function, Type, Visibility};
pub use deps::DependenceRelation;
pub use print::print_contract;

use crate::diag::Diagnostic;

/// Parses and type-checks contract source. The returned AST has every
/// expression annotated with its type.
pub fn parse_contract(file: &str, src: &str) -> Result<Contract, Diagnostic> {
    let mut contract = parser::parse_contract_source(file, src)?;
    typeck::typecheck(file, &mut contract)?;
    Ok(contract)
}

/// Re-checks an AST, e.g. after mutation. Errors use `file` for positions.
pub fn recheck(file: &str, contract: &Contract) -> Result<Contract, Diagnostic> {
    let mut copy = contract.clone();
    typeck::typecheck(file, &mut copy)?;
    Ok(copy)
}
