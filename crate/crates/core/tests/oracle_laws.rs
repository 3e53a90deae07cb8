//! Conservation, positivity, consistency, and convergence-order checks on
//! the direct nonlinear integrator.

mod common;

use recomb_core::linearizer::solve_continuous;
use recomb_core::measure::{tv_distance, ProductSpace};
use recomb_core::oracle::{integrate, integrate_checkpoints, IntegratorConfig};
use recomb_core::partition::GroundSet;

#[test]
fn mass_is_conserved_over_a_long_horizon() {
    let mut rng = common::rng(1001);
    let ground = GroundSet::full(3).unwrap();
    let space = ProductSpace::binary(3).unwrap();
    let rho = common::random_rate_spec(&mut rng, &ground, 1.0);
    let omega0 = common::random_probability_measure(&mut rng, &space);
    let cfg = IntegratorConfig { step_size: 1e-3 };
    let final_state = integrate(&omega0, &rho, 10.0, &cfg).unwrap();
    assert!(
        (final_state.total_mass() - 1.0).abs() <= 1e-9,
        "mass drift {}",
        (final_state.total_mass() - 1.0).abs()
    );
}

#[test]
fn trajectory_stays_positive() {
    let mut rng = common::rng(1002);
    let ground = GroundSet::full(3).unwrap();
    let space = ProductSpace::binary(3).unwrap();
    let rho = common::random_rate_spec(&mut rng, &ground, 1.3);
    let omega0 = common::random_probability_measure(&mut rng, &space);
    let cfg = IntegratorConfig { step_size: 1e-3 };
    let times: Vec<f64> = (0..=10).map(|k| k as f64).collect();
    for state in integrate_checkpoints(&omega0, &rho, &times, &cfg).unwrap() {
        assert!(state.weights().iter().all(|&w| w >= -1e-9));
    }
}

#[test]
fn oracle_marginals_solve_the_marginal_system() {
    let mut rng = common::rng(1003);
    let ground = GroundSet::full(3).unwrap();
    let space = ProductSpace::binary(3).unwrap();
    let rho = common::random_rate_spec(&mut rng, &ground, 1.0);
    let omega0 = common::random_probability_measure(&mut rng, &space);
    let cfg = IntegratorConfig { step_size: 1e-3 };
    let t = 1.5;
    let full = integrate(&omega0, &rho, t, &cfg).unwrap();
    for u_elems in common::non_empty_subsets(ground.elements()) {
        let u = GroundSet::new(u_elems).unwrap();
        let small = integrate(
            &omega0.marginal(&u).unwrap(),
            &rho.marginalize(&u).unwrap(),
            t,
            &cfg,
        )
        .unwrap();
        let dist = tv_distance(&full.marginal(&u).unwrap(), &small).unwrap();
        assert!(dist <= 1e-9, "marginal consistency at {u}: {dist}");
    }
}

#[test]
fn rk4_shows_fourth_order_convergence() {
    // Richardson: halving the step should cut the error against the
    // linearised reference by about 2⁴.
    let mut rng = common::rng(1004);
    let ground = GroundSet::full(3).unwrap();
    let space = ProductSpace::binary(3).unwrap();
    let rho = common::random_rate_spec(&mut rng, &ground, 2.0);
    let omega0 = common::random_probability_measure(&mut rng, &space);
    let t = 1.0;
    let reference = &solve_continuous(&omega0, &rho, &[t]).unwrap()[0];
    let error_at = |h: f64| -> f64 {
        let cfg = IntegratorConfig { step_size: h };
        let got = integrate(&omega0, &rho, t, &cfg).unwrap();
        tv_distance(&got, reference).unwrap()
    };
    let errors = [error_at(0.2), error_at(0.1), error_at(0.05)];
    for pair in errors.windows(2) {
        let order = (pair[0] / pair[1]).log2();
        assert!(
            order >= 3.8,
            "observed order {order} from errors {pair:?}"
        );
    }
}
