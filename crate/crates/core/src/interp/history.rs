//! Seeded random call-history generation.
//!
//! Histories are deterministic in (contract, n, seed): functions are drawn
//! uniformly from the public surface, block numbers increase by one per
//! call, and argument distributions are biased toward values that exercise
//! boundary behavior — zero addresses, repeated addresses within a call,
//! zero amounts, and occasional near-maximum magnitudes.

use super::{Call, RunConfig};
use crate::lang::ast::{Contract, Type};
use crate::value::Value;
use num_bigint::{BigInt, BigUint};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

const P_ZERO_SENDER: f64 = 0.06;
const P_ZERO_ADDRESS_ARG: f64 = 0.15;
const P_REPEATED_ADDRESS_ARG: f64 = 0.25;
const P_ZERO_AMOUNT: f64 = 0.10;
const P_MAX_AMOUNT: f64 = 0.02;
const P_NEAR_MAX_AMOUNT: f64 = 0.01;
const P_SMALL_AMOUNT: f64 = 0.62;

/// Generates `n` calls against the contract's public functions.
pub fn generate_history(contract: &Contract, config: &RunConfig, n: usize, seed: u64) -> Vec<Call> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let publics: Vec<_> = contract.public_functions().collect();
    assert!(!publics.is_empty(), "contract has no public functions");

    let mut calls = Vec::with_capacity(n);
    for i in 0..n {
        let f = publics[rng.gen_range(0..publics.len())];
        let sender = if rng.gen_bool(P_ZERO_SENDER) {
            0
        } else {
            rng.gen_range(1..=config.k_addresses)
        };
        let mut seen_addrs: Vec<u32> = Vec::new();
        let mut args = BTreeMap::new();
        for p in &f.params {
            let v = gen_value(&p.ty, config, &mut rng, &mut seen_addrs);
            args.insert(p.name.clone(), v);
        }
        calls.push(Call {
            function: f.name.clone(),
            args,
            sender,
            block: (i + 1) as u64,
        });
    }
    calls
}

fn gen_address(config: &RunConfig, rng: &mut ChaCha8Rng, seen: &mut Vec<u32>) -> u32 {
    let k = if rng.gen_bool(P_ZERO_ADDRESS_ARG) {
        0
    } else if !seen.is_empty() && rng.gen_bool(P_REPEATED_ADDRESS_ARG) {
        seen[rng.gen_range(0..seen.len())]
    } else {
        rng.gen_range(1..=config.k_addresses)
    };
    seen.push(k);
    k
}

fn gen_uint(config: &RunConfig, rng: &mut ChaCha8Rng) -> BigUint {
    let roll: f64 = rng.gen();
    if roll < P_ZERO_AMOUNT {
        BigUint::default()
    } else if roll < P_ZERO_AMOUNT + P_MAX_AMOUNT {
        config.uint_max()
    } else if roll < P_ZERO_AMOUNT + P_MAX_AMOUNT + P_NEAR_MAX_AMOUNT {
        config.uint_max() - BigUint::from(1u32)
    } else if roll < P_ZERO_AMOUNT + P_MAX_AMOUNT + P_NEAR_MAX_AMOUNT + P_SMALL_AMOUNT {
        BigUint::from(rng.gen_range(1u64..=10))
    } else {
        BigUint::from(rng.gen_range(11u64..=100))
    }
}

fn gen_value(ty: &Type, config: &RunConfig, rng: &mut ChaCha8Rng, seen: &mut Vec<u32>) -> Value {
    match ty {
        Type::Address => Value::Addr(gen_address(config, rng, seen)),
        Type::Uint => Value::Uint(gen_uint(config, rng)),
        Type::Int => Value::Int(BigInt::from(rng.gen_range(-5i64..=5))),
        Type::Bool => Value::Bool(rng.gen_bool(0.5)),
        Type::Str => {
            let options = ["", "a", "xy"];
            Value::Str(options[rng.gen_range(0..options.len())].to_string())
        }
        Type::Bytes => {
            let len = rng.gen_range(0..=2);
            Value::Bytes((0..len).map(|_| rng.gen::<u8>()).collect())
        }
        Type::Array(elem) => {
            let len = rng.gen_range(1..=3);
            Value::Array(
                (0..len)
                    .map(|_| gen_value(elem, config, rng, seen))
                    .collect(),
            )
        }
        Type::Mapping(..) | Type::Struct(_) | Type::Unknown => {
            unreachable!("public parameters are value types")
        }
    }
}
