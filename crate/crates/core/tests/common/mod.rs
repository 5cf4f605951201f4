#![allow(dead_code)]

use bethe_core::context::{sample_distinct, stream, DeformationContext};
use bethe_core::rep::ChainSpec;
use num_complex::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Generic chain with `q`, `z` and `κ` drawn from streams of `seed`.
pub fn random_chain(n: usize, l: usize, seed: u64) -> ChainSpec {
    let ctx = DeformationContext::random(seed).unwrap().with_seed(seed);
    let mut rng = stream(seed, "test-chain");
    let z = sample_distinct(&mut rng, l, &[], 1e-2).unwrap();
    let kappa = sample_distinct(&mut rng, n, &[], 1e-2).unwrap();
    ChainSpec::new(n, z, kappa, ctx).unwrap()
}

/// `count` annulus points from the named stream, kept away from `avoid`.
pub fn points(seed: u64, name: &str, count: usize, avoid: &[Complex64]) -> Vec<Complex64> {
    let mut rng = stream(seed, name);
    sample_distinct(&mut rng, count, avoid, 5e-2).unwrap()
}
