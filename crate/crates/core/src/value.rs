//! Runtime values and contract state.
//!
//! Mappings are canonical: an entry whose value equals the default for the
//! value type is never stored, so two states are semantically equal exactly
//! when they are structurally equal.

use crate::lang::ast::{Contract, Type};
use num_bigint::{BigInt, BigUint};
use std::collections::BTreeMap;
use std::fmt;

/// Key of a mapping entry; the language restricts keys to these two types.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum MapKey {
    Addr(u32),
    Uint(BigUint),
}

impl fmt::Display for MapKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapKey::Addr(k) => write!(f, "a{k}"),
            MapKey::Uint(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Uint(BigUint),
    Int(BigInt),
    Bool(bool),
    /// Address `a<k>`; `a0` is the zero address.
    Addr(u32),
    Str(String),
    Bytes(Vec<u8>),
    Array(Vec<Value>),
    Map(BTreeMap<MapKey, Value>),
    Struct(BTreeMap<String, Value>),
}

/// State variable name -> value.
pub type ContractState = BTreeMap<String, Value>;

impl Value {
    pub fn uint(n: u64) -> Value {
        Value::Uint(BigUint::from(n))
    }

    /// Default (zero) value of a type.
    pub fn default_for(ty: &Type, contract: &Contract) -> Value {
        match ty {
            Type::Uint => Value::Uint(BigUint::default()),
            Type::Int => Value::Int(BigInt::default()),
            Type::Bool => Value::Bool(false),
            Type::Address => Value::Addr(0),
            Type::Str => Value::Str(String::new()),
            Type::Bytes => Value::Bytes(Vec::new()),
            Type::Array(_) => Value::Array(Vec::new()),
            Type::Mapping(..) => Value::Map(BTreeMap::new()),
            Type::Struct(name) => {
                let decl = contract
                    .struct_decl(name)
                    .expect("struct names are resolved during type checking");
                Value::Struct(
                    decl.fields
                        .iter()
                        .map(|f| (f.name.clone(), Value::default_for(&f.ty, contract)))
                        .collect(),
                )
            }
            Type::Unknown => unreachable!("unknown type survived type checking"),
        }
    }

    /// True when this is the default value of `ty`.
    pub fn is_default_for(&self, ty: &Type, contract: &Contract) -> bool {
        *self == Value::default_for(ty, contract)
    }

    pub fn type_matches(&self, ty: &Type, contract: &Contract) -> bool {
        match (self, ty) {
            (Value::Uint(_), Type::Uint) => true,
            (Value::Int(_), Type::Int) => true,
            (Value::Bool(_), Type::Bool) => true,
            (Value::Addr(_), Type::Address) => true,
            (Value::Str(_), Type::Str) => true,
            (Value::Bytes(_), Type::Bytes) => true,
            (Value::Array(items), Type::Array(elem)) => {
                items.iter().all(|v| v.type_matches(elem, contract))
            }
            (Value::Map(entries), Type::Mapping(k, v)) => entries.iter().all(|(key, val)| {
                let key_ok = matches!(
                    (key, &**k),
                    (MapKey::Addr(_), Type::Address) | (MapKey::Uint(_), Type::Uint)
                );
                key_ok && val.type_matches(v, contract)
            }),
            (Value::Struct(fields), Type::Struct(name)) => {
                let Some(decl) = contract.struct_decl(name) else {
                    return false;
                };
                decl.fields.len() == fields.len()
                    && decl.fields.iter().all(|f| {
                        fields
                            .get(&f.name)
                            .is_some_and(|v| v.type_matches(&f.ty, contract))
                    })
            }
            _ => false,
        }
    }
}

/// Fresh state with every state variable at its default value.
pub fn default_state(contract: &Contract) -> ContractState {
    contract
        .state_vars
        .iter()
        .map(|v| (v.name.clone(), Value::default_for(&v.ty, contract)))
        .collect()
}

/// Removes map entries that hold default values, recursively, so states
/// stay canonical after writes.
pub fn canonicalize(value: &mut Value, ty: &Type, contract: &Contract) {
    match (value, ty) {
        (Value::Map(entries), Type::Mapping(_, vty)) => {
            let mut dead = Vec::new();
            for (k, v) in entries.iter_mut() {
                canonicalize(v, vty, contract);
                if v.is_default_for(vty, contract) {
                    dead.push(k.clone());
                }
            }
            for k in dead {
                entries.remove(&k);
            }
        }
        (Value::Array(items), Type::Array(ety)) => {
            for v in items {
                canonicalize(v, ety, contract);
            }
        }
        (Value::Struct(fields), Type::Struct(name)) => {
            if let Some(decl) = contract.struct_decl(name) {
                for f in &decl.fields {
                    if let Some(v) = fields.get_mut(&f.name) {
                        canonicalize(v, &f.ty, contract);
                    }
                }
            }
        }
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_contract;

    #[test]
    fn canonical_map_drops_default_entries() {
        let c = parse_contract("t.mc", "contract C { mapping(address => uint) m; }").unwrap();
        let ty = &c.state_vars[0].ty;
        let mut m = BTreeMap::new();
        m.insert(MapKey::Addr(1), Value::uint(5));
        m.insert(MapKey::Addr(2), Value::uint(0));
        let mut v = Value::Map(m);
        canonicalize(&mut v, ty, &c);
        match v {
            Value::Map(entries) => {
                assert_eq!(entries.len(), 1);
                assert!(entries.contains_key(&MapKey::Addr(1)));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn nested_map_canonicalization_cascades() {
        let c = parse_contract(
            "t.mc",
            "contract C { mapping(address => mapping(address => uint)) m; }",
        )
        .unwrap();
        let ty = &c.state_vars[0].ty;
        let mut inner = BTreeMap::new();
        inner.insert(MapKey::Addr(2), Value::uint(0));
        let mut outer = BTreeMap::new();
        outer.insert(MapKey::Addr(1), Value::Map(inner));
        let mut v = Value::Map(outer);
        canonicalize(&mut v, ty, &c);
        assert_eq!(v, Value::Map(BTreeMap::new()));
    }

    #[test]
    fn struct_default_has_all_fields() {
        let c = parse_contract(
            "t.mc",
            "contract C { struct P { uint a; bool b; } P p; }",
        )
        .unwrap();
        let v = Value::default_for(&c.state_vars[0].ty, &c);
        match v {
            Value::Struct(fields) => {
                assert_eq!(fields["a"], Value::uint(0));
                assert_eq!(fields["b"], Value::Bool(false));
            }
            _ => unreachable!(),
        }
    }
}
