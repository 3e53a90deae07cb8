//! Reproducibility and convergence checks for the Monte Carlo chains.

mod common;

use recomb_core::linearizer::{coefficients_continuous, coefficients_discrete};
use recomb_core::partition::GroundSet;
use recomb_core::process::{compare, simulate_ctmc, simulate_discrete_chain, SimulationConfig};

#[test]
fn counts_are_bitwise_identical_across_worker_counts() {
    let mut rng = common::rng(2001);
    let ground = GroundSet::full(4).unwrap();
    let rho = common::random_rate_spec(&mut rng, &ground, 1.2);
    let cfg = SimulationConfig::new(20_000, 31);

    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| simulate_ctmc(&rho, 0.8, &cfg).unwrap());
    let eight = rayon::ThreadPoolBuilder::new()
        .num_threads(8)
        .build()
        .unwrap()
        .install(|| simulate_ctmc(&rho, 0.8, &cfg).unwrap());
    assert_eq!(single, eight);

    let r = common::random_prob_spec(&mut rng, &ground);
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| simulate_discrete_chain(&r, 3, &cfg).unwrap());
    let eight = rayon::ThreadPoolBuilder::new()
        .num_threads(8)
        .build()
        .unwrap()
        .install(|| simulate_discrete_chain(&r, 3, &cfg).unwrap());
    assert_eq!(single, eight);
}

#[test]
fn empirical_law_converges_like_inverse_sqrt_samples() {
    let mut rng = common::rng(2002);
    let ground = GroundSet::full(3).unwrap();
    let rho = common::random_rate_spec(&mut rng, &ground, 1.0);
    let t = 1.0;
    let reference = coefficients_continuous(&rho, t).unwrap();

    let tv_at = |n_samples: u64| -> f64 {
        let cfg = SimulationConfig::new(n_samples, 77);
        let dist = simulate_ctmc(&rho, t, &cfg).unwrap();
        compare(&dist, &reference, 1.0).unwrap().tv
    };
    let tvs = [tv_at(1_000), tv_at(10_000), tv_at(100_000)];
    assert!(
        tvs[2] < tvs[0],
        "TV should shrink with samples: {tvs:?}"
    );
    // Log-log slope over two decades; the binomial rate is -1/2.
    let slope = (tvs[2].log10() - tvs[0].log10()) / 2.0;
    assert!(
        (-0.85..=-0.25).contains(&slope),
        "slope {slope} from {tvs:?}"
    );
}

#[test]
fn discrete_chain_matches_matrix_power_coefficients() {
    let mut rng = common::rng(2003);
    let ground = GroundSet::full(4).unwrap();
    let r = common::random_prob_spec(&mut rng, &ground);
    let t = 3;
    let reference = coefficients_discrete(&r, t).unwrap();
    let cfg = SimulationConfig::new(100_000, 13);
    let dist = simulate_discrete_chain(&r, t, &cfg).unwrap();
    let report = compare(&dist, &reference, 0.01).unwrap();
    assert!(report.pass, "TV {} above threshold", report.tv);
    // z-scores should look binomial: none wildly out of range.
    for row in &report.rows {
        assert!(
            row.z_score.abs() <= 5.0,
            "state {} has z {}",
            row.partition,
            row.z_score
        );
    }
}

#[test]
fn ctmc_and_discrete_reject_bad_inputs() {
    let mut rng = common::rng(2004);
    let ground = GroundSet::full(3).unwrap();
    let rho = common::random_rate_spec(&mut rng, &ground, 1.0);
    assert!(simulate_ctmc(&rho, -1.0, &SimulationConfig::new(10, 0)).is_err());
    assert!(simulate_ctmc(&rho, 1.0, &SimulationConfig::new(0, 0)).is_err());
    let r = common::random_prob_spec(&mut rng, &ground);
    assert!(simulate_discrete_chain(&r, 1, &SimulationConfig::new(0, 0)).is_err());
}
