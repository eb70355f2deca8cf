//! Concrete falsification by sampling.
//!
//! Evaluates the negated query on concrete assignments drawn from machine
//! corners and a seeded generator. Values are invented lazily as the
//! evaluator encounters variables and mapping cells, so only what the
//! formula reads is ever sampled. This backend can refute an obligation
//! with a model but can never prove one.

use super::backend::{BackendConfig, ProofResult, VerificationQuery};
use super::formula::{CVal, Evaluator, Model, Sort};
use num_bigint::{BigInt, BigUint};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn falsify(query: &VerificationQuery, config: &BackendConfig) -> ProofResult {
    let negated = query.negation();
    let max = config.uint_max();
    let corners: Vec<BigInt> = vec![
        BigInt::from(0),
        BigInt::from(1),
        BigInt::from(2),
        max.clone() - 1,
        max.clone(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let width_bytes = config.width.div_ceil(8) as usize;

    for trial in 0..config.samples {
        let mut rng_trial = ChaCha8Rng::seed_from_u64(rng.gen());
        // The first trials pin every integer to one corner; later ones mix
        // corners and uniform draws per variable.
        let pinned_corner = (trial < corners.len()).then(|| corners[trial].clone());
        let corners_ref = &corners;
        let model = {
            let mut ev = Evaluator {
                model: Model::default(),
                on_missing: Box::new(move |_, sort| match sort {
                    Sort::Addr => CVal::Addr(rng_trial.gen_range(0..=config.k_addresses)),
                    Sort::Bool => CVal::Bool(rng_trial.gen()),
                    Sort::Int => {
                        if let Some(c) = &pinned_corner {
                            return CVal::Int(c.clone());
                        }
                        if rng_trial.gen_bool(0.5) {
                            let i = rng_trial.gen_range(0..corners_ref.len());
                            CVal::Int(corners_ref[i].clone())
                        } else {
                            let mut bytes = vec![0u8; width_bytes];
                            rng_trial.fill(&mut bytes[..]);
                            let mut n = BigInt::from(BigUint::from_bytes_le(&bytes));
                            if &n > corners_ref.last().unwrap() {
                                n = corners_ref.last().unwrap().clone();
                            }
                            CVal::Int(n)
                        }
                    }
                }),
                vars: &query.vars,
                maps: &query.maps,
            };
            if ev.formula(&negated) {
                Some(ev.model)
            } else {
                None
            }
        };
        if let Some(model) = model {
            return ProofResult::Refuted(Some(model));
        }
    }
    ProofResult::Unknown(format!(
        "no counterexample within {} samples",
        config.samples
    ))
}
