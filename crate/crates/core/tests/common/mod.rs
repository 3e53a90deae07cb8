//! Shared helpers for the integration suites: seeded random specs and
//! measures, and small combinatorial utilities.

#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use recomb_core::measure::{ProductMeasure, ProductSpace};
use recomb_core::partition::{enumerate_partitions, GroundSet};
use recomb_core::rates::{ProbSpec, RateSpec};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random rates on every partition except the single-block one, scaled to
/// the requested total rate.
pub fn random_rate_spec(rng: &mut ChaCha8Rng, ground: &GroundSet, total: f64) -> RateSpec {
    let parts: Vec<_> = enumerate_partitions(ground)
        .into_iter()
        .filter(|p| !p.is_top())
        .collect();
    let raw: Vec<f64> = parts.iter().map(|_| rng.gen::<f64>() + 0.05).collect();
    let sum: f64 = raw.iter().sum();
    RateSpec::new(
        ground.clone(),
        parts
            .into_iter()
            .zip(raw)
            .map(|(p, v)| (p, v * total / sum)),
    )
    .unwrap()
}

/// Random probabilities on every partition, normalized to sum 1.
pub fn random_prob_spec(rng: &mut ChaCha8Rng, ground: &GroundSet) -> ProbSpec {
    let parts = enumerate_partitions(ground);
    let raw: Vec<f64> = parts.iter().map(|_| rng.gen::<f64>() + 0.05).collect();
    let sum: f64 = raw.iter().sum();
    ProbSpec::new(
        ground.clone(),
        parts.into_iter().zip(raw).map(|(p, v)| (p, v / sum)),
    )
    .unwrap()
}

pub fn random_probability_measure(rng: &mut ChaCha8Rng, space: &ProductSpace) -> ProductMeasure {
    let raw: Vec<f64> = (0..space.total_states())
        .map(|_| rng.gen::<f64>() + 0.01)
        .collect();
    let sum: f64 = raw.iter().sum();
    ProductMeasure::new(space.clone(), raw.into_iter().map(|w| w / sum).collect()).unwrap()
}

pub fn random_positive_measure(
    rng: &mut ChaCha8Rng,
    space: &ProductSpace,
    scale: f64,
) -> ProductMeasure {
    let raw: Vec<f64> = (0..space.total_states())
        .map(|_| rng.gen::<f64>() * scale)
        .collect();
    ProductMeasure::new(space.clone(), raw).unwrap()
}

/// Product space on `{1..n}` with random alphabet sizes in `2..=max_size`.
pub fn random_space(rng: &mut ChaCha8Rng, n: u32, max_size: usize) -> ProductSpace {
    let sites = GroundSet::full(n).unwrap();
    let sizes = (0..n).map(|_| rng.gen_range(2..=max_size)).collect();
    ProductSpace::new(sites, sizes).unwrap()
}

/// All non-empty subsets of `elems`, as sorted vectors.
pub fn non_empty_subsets(elems: &[u32]) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for mask in 1u32..(1 << elems.len()) {
        let subset: Vec<u32> = elems
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &e)| e)
            .collect();
        out.push(subset);
    }
    out
}

/// All `k`-element subsets of `elems`.
pub fn subsets_of_size(elems: &[u32], k: usize) -> Vec<Vec<u32>> {
    non_empty_subsets(elems)
        .into_iter()
        .filter(|s| s.len() == k)
        .collect()
}

pub fn max_abs_dev(a: &ProductMeasure, b: &ProductMeasure) -> f64 {
    a.weights()
        .iter()
        .zip(b.weights())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
