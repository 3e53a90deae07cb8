//! Direct, linearisation-free evolution of the recombination dynamics.
//!
//! Continuous time: fixed-step classical RK4 on the nonlinear vector field
//! `Φ(ω) = Σ_𝒜 ϱ(𝒜)(R_𝒜(ω) − ω)`. Discrete time: exact iteration of
//! `ω_{t+1} = Σ_𝒜 r(𝒜) R_𝒜(ω_t)`. Recombinators are evaluated afresh at
//! every stage so this path stays independent of the linearizer's
//! precomputation; no renormalization is ever applied, mass conservation
//! has to emerge numerically.

use crate::error::{Error, Result};
use crate::measure::{recombinator, ProductMeasure, WEIGHT_TOL};
use crate::rates::{ProbSpec, RateSpec};

/// Fixed-step RK4 configuration. The step size divides the requested span
/// into whole steps plus one final partial step.
#[derive(Debug, Clone, Copy)]
pub struct IntegratorConfig {
    pub step_size: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { step_size: 1e-3 }
    }
}

impl IntegratorConfig {
    fn check(&self) -> Result<()> {
        if !self.step_size.is_finite() || self.step_size <= 0.0 {
            return Err(Error::InvalidStepSize(self.step_size));
        }
        Ok(())
    }
}

fn check_spec(rho: &RateSpec) -> Result<()> {
    let issues = rho.validate();
    if issues.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidSpec(issues.join("; ")))
    }
}

/// The vector field evaluated literally; intermediate RK4 stages may carry
/// slightly signed measures, which the recombinator formula accepts.
fn phi(omega: &ProductMeasure, rho: &RateSpec) -> Result<ProductMeasure> {
    let mut out = vec![0.0; omega.weights().len()];
    for (partition, rate) in rho.iter() {
        if rate == 0.0 {
            continue;
        }
        let recombined = recombinator(partition, omega)?;
        for ((o, r), w) in out
            .iter_mut()
            .zip(recombined.weights())
            .zip(omega.weights())
        {
            *o += rate * (r - w);
        }
    }
    ProductMeasure::new(omega.space().clone(), out)
}

/// The right-hand side `Φ(ω)` of the continuous-time dynamics. Requires a
/// positive measure (up to round-off); the result has zero total mass.
pub fn rhs(omega: &ProductMeasure, rho: &RateSpec) -> Result<ProductMeasure> {
    if omega.space().sites() != rho.ground() {
        return Err(Error::GroundSetMismatch {
            left: omega.space().sites().to_string(),
            right: rho.ground().to_string(),
        });
    }
    if let Some(w) = omega.weights().iter().find(|w| **w < -WEIGHT_TOL) {
        return Err(Error::NotPositive(format!("weight {w}")));
    }
    check_spec(rho)?;
    phi(omega, rho)
}

fn rk4_step(omega: &ProductMeasure, rho: &RateSpec, h: f64) -> Result<ProductMeasure> {
    let space = omega.space().clone();
    let stage = |base: &ProductMeasure, k: &ProductMeasure, factor: f64| -> Result<ProductMeasure> {
        let w = base
            .weights()
            .iter()
            .zip(k.weights())
            .map(|(b, k)| b + factor * k)
            .collect();
        ProductMeasure::new(space.clone(), w)
    };
    let k1 = phi(omega, rho)?;
    let k2 = phi(&stage(omega, &k1, h / 2.0)?, rho)?;
    let k3 = phi(&stage(omega, &k2, h / 2.0)?, rho)?;
    let k4 = phi(&stage(omega, &k3, h)?, rho)?;
    let weights = omega
        .weights()
        .iter()
        .enumerate()
        .map(|(i, w)| {
            w + h / 6.0
                * (k1.weights()[i] + 2.0 * k2.weights()[i] + 2.0 * k3.weights()[i] + k4.weights()[i])
        })
        .collect();
    ProductMeasure::new(space, weights)
}

/// Integrates from 0 and records the state at each checkpoint time.
/// Checkpoints must be non-negative and non-decreasing; each span is
/// covered by whole steps plus one partial step, so checkpoint times are
/// hit exactly.
pub fn integrate_checkpoints(
    omega0: &ProductMeasure,
    rho: &RateSpec,
    times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<ProductMeasure>> {
    cfg.check()?;
    check_spec(rho)?;
    if omega0.space().sites() != rho.ground() {
        return Err(Error::GroundSetMismatch {
            left: omega0.space().sites().to_string(),
            right: rho.ground().to_string(),
        });
    }
    if !omega0.is_probability() {
        return Err(Error::NotAProbability(format!(
            "total mass {}",
            omega0.total_mass()
        )));
    }
    for &t in times {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::UnsortedTimes);
    }

    let h = cfg.step_size;
    let mut current = omega0.clone();
    let mut t_current = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        let span = target - t_current;
        let whole = (span / h).floor() as u64;
        for _ in 0..whole {
            current = rk4_step(&current, rho, h)?;
        }
        let remainder = span - whole as f64 * h;
        if remainder > 1e-12 {
            current = rk4_step(&current, rho, remainder)?;
        }
        t_current = target;
        out.push(current.clone());
    }
    Ok(out)
}

/// RK4 trajectory of the nonlinear dynamics up to `t_end`.
pub fn integrate(
    omega0: &ProductMeasure,
    rho: &RateSpec,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<ProductMeasure> {
    let mut states = integrate_checkpoints(omega0, rho, &[t_end], cfg)?;
    Ok(states.pop().expect("one checkpoint"))
}

/// Exact iteration of the discrete-time dynamics; returns
/// `[ω_0, ω_1, …, ω_generations]`.
pub fn iterate(
    omega0: &ProductMeasure,
    r: &ProbSpec,
    generations: u64,
) -> Result<Vec<ProductMeasure>> {
    if omega0.space().sites() != r.ground() {
        return Err(Error::GroundSetMismatch {
            left: omega0.space().sites().to_string(),
            right: r.ground().to_string(),
        });
    }
    if !omega0.is_probability() {
        return Err(Error::NotAProbability(format!(
            "total mass {}",
            omega0.total_mass()
        )));
    }
    r.check_for_build()?;
    let mut out = Vec::with_capacity(generations as usize + 1);
    out.push(omega0.clone());
    let mut current = omega0.clone();
    for _ in 0..generations {
        let mut next = vec![0.0; current.weights().len()];
        for (partition, prob) in r.iter() {
            if prob == 0.0 {
                continue;
            }
            let recombined = recombinator(partition, &current)?;
            for (n, v) in next.iter_mut().zip(recombined.weights()) {
                *n += prob * v;
            }
        }
        current = ProductMeasure::new(current.space().clone(), next)?;
        out.push(current.clone());
    }
    Ok(out)
}
