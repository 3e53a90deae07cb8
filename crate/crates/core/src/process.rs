//! Monte Carlo simulation of the partition-valued refinement processes.
//!
//! Both chains start at the single-block partition and move strictly
//! downward in the refinement order. The continuous-time chain jumps per
//! the generator rows (Gillespie's direct method); the discrete-time chain
//! refines every block independently per step. Sampling is reproducible:
//! each sample index gets its own counter-selected RNG stream, so serial
//! and parallel runs agree bitwise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linearizer::{build_generator, CoefficientVector};
use crate::partition::{
    enumerate_partitions, join_disjoint, GroundSet, PartitionEnumeration, SetPartition,
};
use crate::rates::{ProbSpec, RateSpec};

/// Sample count and RNG seed; identical configs reproduce identical output
/// regardless of worker count.
#[derive(Debug, Clone, Copy)]
pub struct SimulationConfig {
    pub n_samples: u64,
    pub seed: u64,
}

impl SimulationConfig {
    pub fn new(n_samples: u64, seed: u64) -> Self {
        Self { n_samples, seed }
    }

    fn check(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::NoSamples);
        }
        Ok(())
    }
}

/// Counts per partition index from a batch of simulated chains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalDistribution {
    ground: GroundSet,
    counts: Vec<u64>,
    n_samples: u64,
}

impl EmpiricalDistribution {
    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n_samples(&self) -> u64 {
        self.n_samples
    }

    pub fn fraction(&self, index: usize) -> f64 {
        self.counts[index] as f64 / self.n_samples as f64
    }
}

fn stream_rng(seed: u64, sample: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample);
    rng
}

fn tally<F>(
    ground: &GroundSet,
    states: usize,
    cfg: &SimulationConfig,
    sample_one: F,
) -> EmpiricalDistribution
where
    F: Fn(&mut ChaCha8Rng) -> usize + Sync,
{
    let counts = (0..cfg.n_samples)
        .into_par_iter()
        .fold(
            || vec![0u64; states],
            |mut acc, sample| {
                let mut rng = stream_rng(cfg.seed, sample);
                acc[sample_one(&mut rng)] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; states],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    EmpiricalDistribution {
        ground: ground.clone(),
        counts,
        n_samples: cfg.n_samples,
    }
}

/// Cross-checks a sampled jump against the per-block description: the
/// target must replace exactly one block by a proper partition of it, at
/// the marginal rate the generator entry holds.
#[cfg(debug_assertions)]
fn check_jump(
    rho: &RateSpec,
    parts: &[SetPartition],
    from: usize,
    to: usize,
    rate: f64,
) -> bool {
    let (b, c) = (&parts[from], &parts[to]);
    if !c.is_refinement_of(b).unwrap_or(false) || c == b {
        return false;
    }
    let changed: Vec<usize> = (0..b.num_blocks())
        .filter(|&i| !c.blocks().contains(&b.blocks()[i]))
        .collect();
    if changed.len() != 1 {
        return false;
    }
    let block = GroundSet::new(b.blocks()[changed[0]].clone()).unwrap();
    let refined = c.restrict(&block).unwrap();
    let marginal = rho.marginalize(&block).unwrap().get(&refined);
    (marginal - rate).abs() <= 1e-12
}

/// Simulates the continuous-time partitioning process to time `t` and
/// returns the empirical distribution of the state at `t`.
///
/// Each sample starts at the single-block partition; in state `ℬ` the exit
/// rate is the negated diagonal of the generator, waiting times are
/// exponential, and the jump target is drawn from the off-diagonal row.
/// States with zero exit rate absorb immediately.
pub fn simulate_ctmc(
    rho: &RateSpec,
    t: f64,
    cfg: &SimulationConfig,
) -> Result<EmpiricalDistribution> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    cfg.check()?;
    let q = build_generator(rho)?;
    let n = q.dim();
    let exit_rates: Vec<f64> = (0..n).map(|i| -q.entries()[[i, i]]).collect();
    // Cumulative off-diagonal rates per row, in canonical column order.
    let jump_tables: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|row| {
            let mut cum = 0.0;
            (0..n)
                .filter(|&col| col != row && q.entries()[[row, col]] > 0.0)
                .map(|col| {
                    cum += q.entries()[[row, col]];
                    (col, cum)
                })
                .collect()
        })
        .collect();
    #[cfg(debug_assertions)]
    let parts = q.enumeration().partitions().to_vec();
    #[cfg(debug_assertions)]
    let rho_for_check = rho.without_top();

    let dist = tally(rho.ground(), n, cfg, |rng| {
        let mut state = 0usize;
        let mut time = 0.0;
        loop {
            let lambda = exit_rates[state];
            if lambda <= 0.0 {
                break;
            }
            let u: f64 = rng.gen();
            time += -(1.0 - u).ln() / lambda;
            if time > t {
                break;
            }
            let draw: f64 = rng.gen::<f64>() * lambda;
            let table = &jump_tables[state];
            let next = table
                .iter()
                .find(|&&(_, cum)| draw < cum)
                .map(|&(col, _)| col)
                .unwrap_or(table.last().expect("positive exit rate").0);
            #[cfg(debug_assertions)]
            {
                let rate = q.entries()[[state, next]];
                debug_assert!(check_jump(&rho_for_check, &parts, state, next, rate));
            }
            state = next;
        }
        state
    });
    Ok(dist)
}

/// Per-block sampling table: the partitions of one block and the cumulative
/// marginal probabilities over them.
struct BlockSampler {
    parts: Vec<SetPartition>,
    cumulative: Vec<f64>,
}

impl BlockSampler {
    fn build(r: &ProbSpec, block: &[u32]) -> Result<Self> {
        let ground = GroundSet::new(block.to_vec())?;
        let marginal = r.marginalize(&ground)?;
        let parts = enumerate_partitions(&ground);
        let mut cum = 0.0;
        let cumulative = parts
            .iter()
            .map(|p| {
                cum += marginal.get(p);
                cum
            })
            .collect();
        Ok(Self { parts, cumulative })
    }

    fn draw(&self, u: f64) -> &SetPartition {
        let idx = self
            .cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.parts.len() - 1);
        &self.parts[idx]
    }
}

/// Simulates the discrete-time chain for `t` steps: per step, every block
/// of the current state is refined independently with the induced block
/// probabilities (staying put is the single-block draw), and the next state
/// joins the drawn refinements.
pub fn simulate_discrete_chain(
    r: &ProbSpec,
    t: u64,
    cfg: &SimulationConfig,
) -> Result<EmpiricalDistribution> {
    cfg.check()?;
    r.check_for_build()?;
    let enumeration = PartitionEnumeration::new(r.ground().clone());
    // One sampler per distinct block appearing anywhere in the lattice.
    let mut samplers: Vec<(Vec<u32>, BlockSampler)> = Vec::new();
    for part in enumeration.partitions() {
        for block in part.blocks() {
            if !samplers.iter().any(|(b, _)| b == block) {
                samplers.push((block.clone(), BlockSampler::build(r, block)?));
            }
        }
    }
    let sampler_for = |block: &Vec<u32>| -> &BlockSampler {
        &samplers
            .iter()
            .find(|(b, _)| b == block)
            .expect("every block has a sampler")
            .1
    };

    let dist = tally(r.ground(), enumeration.len(), cfg, |rng| {
        let mut state = 0usize;
        for _ in 0..t {
            let current = &enumeration.partitions()[state];
            let mut drawn: Vec<SetPartition> = Vec::with_capacity(current.num_blocks());
            for block in current.blocks() {
                drawn.push(sampler_for(block).draw(rng.gen()).clone());
            }
            let next = join_disjoint(&drawn).expect("blocks are disjoint");
            debug_assert!(next.is_refinement_of(current).unwrap());
            state = enumeration
                .index_of(&next)
                .expect("refinement stays in the lattice")
                .0;
        }
        state
    });
    Ok(dist)
}

/// One line of a Monte Carlo comparison.
#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub partition: String,
    pub count: u64,
    pub fraction: f64,
    pub reference: f64,
    pub z_score: f64,
}

/// Empirical-vs-reference comparison: total variation distance, per-state
/// binomial z-scores, and a pass/fail verdict against a TV threshold.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub tv: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl ComparisonReport {
    /// CSV with one row per partition.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("partition,count,fraction,reference,z_score\n");
        for row in &self.rows {
            out.push_str(&format!(
                "\"{}\",{},{},{},{}\n",
                row.partition, row.count, row.fraction, row.reference, row.z_score
            ));
        }
        out
    }
}

/// Compares an empirical distribution against a coefficient vector on the
/// same ground set.
pub fn compare(
    empirical: &EmpiricalDistribution,
    reference: &CoefficientVector,
    tv_threshold: f64,
) -> Result<ComparisonReport> {
    if empirical.ground() != reference.ground() {
        return Err(Error::GroundSetMismatch {
            left: empirical.ground().to_string(),
            right: reference.ground().to_string(),
        });
    }
    if empirical.n_samples == 0 {
        return Err(Error::NoSamples);
    }
    let partitions = enumerate_partitions(empirical.ground());
    debug_assert_eq!(partitions.len(), empirical.counts.len());
    let n = empirical.n_samples as f64;
    let mut tv = 0.0;
    let mut rows = Vec::with_capacity(partitions.len());
    for (i, partition) in partitions.iter().enumerate() {
        let p = reference.values()[i];
        let count = empirical.counts[i];
        let fraction = count as f64 / n;
        tv += (fraction - p).abs();
        let variance = n * p * (1.0 - p);
        let z_score = if variance > 0.0 {
            (count as f64 - n * p) / variance.sqrt()
        } else if (count as f64 - n * p).abs() < 0.5 {
            0.0
        } else {
            f64::INFINITY
        };
        rows.push(ComparisonRow {
            partition: partition.to_string(),
            count,
            fraction,
            reference: p,
            z_score,
        });
    }
    tv /= 2.0;
    Ok(ComparisonReport {
        rows,
        tv,
        threshold: tv_threshold,
        pass: tv <= tv_threshold,
    })
}
