//! Algebraic laws of recombinators and rate marginalization, checked
//! exhaustively over partition pairs for small ground sets with random
//! alphabets and measures.

mod common;

use recomb_core::measure::{recombinator, tensor, tv_distance, ProductMeasure, WEIGHT_TOL};
use recomb_core::partition::{enumerate_partitions, join_disjoint, GroundSet, SetPartition};

fn gs(elems: &[u32]) -> GroundSet {
    GroundSet::new(elems.to_vec()).unwrap()
}

fn assert_close(a: &ProductMeasure, b: &ProductMeasure, tol: f64, context: &str) {
    let dev = common::max_abs_dev(a, b);
    assert!(dev <= tol, "{context}: deviation {dev} > {tol}");
}

#[test]
fn recombinators_are_positively_homogeneous() {
    let mut rng = common::rng(101);
    for n in 2..=4u32 {
        let space = common::random_space(&mut rng, n, 3);
        let ground = GroundSet::full(n).unwrap();
        let positive = common::random_positive_measure(&mut rng, &space, 2.0);
        // Also a signed measure; homogeneity holds on all of the space.
        let signed = {
            let w: Vec<f64> = positive.weights().iter().map(|w| w - 0.7).collect();
            ProductMeasure::new(space.clone(), w).unwrap()
        };
        for measure in [&positive, &signed] {
            for partition in enumerate_partitions(&ground) {
                for c in [0.0, 0.5, 2.75] {
                    let scaled = ProductMeasure::new(
                        space.clone(),
                        measure.weights().iter().map(|w| c * w).collect(),
                    )
                    .unwrap();
                    let lhs = recombinator(&partition, &scaled).unwrap();
                    let rhs = {
                        let r = recombinator(&partition, measure).unwrap();
                        ProductMeasure::new(
                            space.clone(),
                            r.weights().iter().map(|w| c * w).collect(),
                        )
                        .unwrap()
                    };
                    assert_close(&lhs, &rhs, WEIGHT_TOL, "homogeneity");
                }
            }
        }
    }
}

#[test]
fn recombinators_preserve_norm_of_positive_measures() {
    let mut rng = common::rng(202);
    for n in 2..=4u32 {
        let space = common::random_space(&mut rng, n, 3);
        let ground = GroundSet::full(n).unwrap();
        let mu = common::random_positive_measure(&mut rng, &space, 3.0);
        let prob = common::random_probability_measure(&mut rng, &space);
        for partition in enumerate_partitions(&ground) {
            let r = recombinator(&partition, &mu).unwrap();
            assert!(
                (r.total_variation_norm() - mu.total_variation_norm()).abs() <= WEIGHT_TOL
            );
            assert!(r.is_positive());
            let rp = recombinator(&partition, &prob).unwrap();
            assert!(rp.is_probability());
        }
    }
}

#[test]
fn composition_collapses_to_the_meet_exhaustively() {
    // R_𝒜 R_ℬ = R_{𝒜∧ℬ} on positive measures; the 𝒜 = ℬ diagonal is
    // idempotence.
    let mut rng = common::rng(303);
    for n in 2..=4u32 {
        let space = common::random_space(&mut rng, n, 3);
        let ground = GroundSet::full(n).unwrap();
        let parts = enumerate_partitions(&ground);
        for _ in 0..3 {
            let mu = common::random_positive_measure(&mut rng, &space, 1.5);
            for a in &parts {
                for b in &parts {
                    let lhs = recombinator(a, &recombinator(b, &mu).unwrap()).unwrap();
                    let rhs = recombinator(&a.meet(b).unwrap(), &mu).unwrap();
                    let dist = tv_distance(&lhs, &rhs).unwrap();
                    assert!(dist <= WEIGHT_TOL, "pair ({a}, {b}): TV {dist}");
                }
            }
        }
    }
}

#[test]
fn recombinators_commute_with_marginalization() {
    // π_U(R_𝒜(ω)) = R_{𝒜|U}(π_U(ω)) for positive ω, all 𝒜 and U.
    let mut rng = common::rng(404);
    for n in 2..=4u32 {
        let space = common::random_space(&mut rng, n, 3);
        let ground = GroundSet::full(n).unwrap();
        let omega = common::random_positive_measure(&mut rng, &space, 2.0);
        for partition in enumerate_partitions(&ground) {
            for u_elems in common::non_empty_subsets(ground.elements()) {
                let u = gs(&u_elems);
                let lhs = recombinator(&partition, &omega).unwrap().marginal(&u).unwrap();
                let rhs = recombinator(
                    &partition.restrict(&u).unwrap(),
                    &omega.marginal(&u).unwrap(),
                )
                .unwrap();
                assert_close(&lhs, &rhs, WEIGHT_TOL, "marginalization");
            }
        }
    }
}

#[test]
fn recombinators_factorize_over_two_set_splits() {
    // For a split {U, V} of S and probability μ:
    // R_{𝒜⊔ℬ}(μ) = R_𝒜(μ^U) ⊗ R_ℬ(μ^V).
    let mut rng = common::rng(505);
    let n = 4u32;
    let space = common::random_space(&mut rng, n, 3);
    let ground = GroundSet::full(n).unwrap();
    let mu = common::random_probability_measure(&mut rng, &space);
    for split in enumerate_partitions(&ground)
        .into_iter()
        .filter(|p| p.num_blocks() == 2)
    {
        let u = gs(&split.blocks()[0]);
        let v = gs(&split.blocks()[1]);
        for a in enumerate_partitions(&u) {
            for b in enumerate_partitions(&v) {
                let joined = join_disjoint(&[a.clone(), b.clone()]).unwrap();
                let lhs = recombinator(&joined, &mu).unwrap();
                let rhs = tensor(&[
                    recombinator(&a, &mu.marginal(&u).unwrap()).unwrap(),
                    recombinator(&b, &mu.marginal(&v).unwrap()).unwrap(),
                ])
                .unwrap();
                assert_close(&lhs, &rhs, WEIGHT_TOL, "factorization");
            }
        }
    }
}

#[test]
fn rate_marginalization_is_transitive() {
    let mut rng = common::rng(606);
    for n in 2..=4u32 {
        let ground = GroundSet::full(n).unwrap();
        let rho = common::random_rate_spec(&mut rng, &ground, 2.0);
        for u_elems in common::non_empty_subsets(ground.elements()) {
            let u = gs(&u_elems);
            let through_u = rho.marginalize(&u).unwrap();
            for v_elems in common::non_empty_subsets(&u_elems) {
                let v = gs(&v_elems);
                let two_hops = through_u.marginalize(&v).unwrap();
                let direct = rho.marginalize(&v).unwrap();
                for part in enumerate_partitions(&v) {
                    let dev = (two_hops.get(&part) - direct.get(&part)).abs();
                    assert!(dev <= WEIGHT_TOL, "transitivity at {part}: {dev}");
                }
            }
        }
    }
}

#[test]
fn prob_marginalization_preserves_normalization() {
    let mut rng = common::rng(707);
    for n in 2..=4u32 {
        let ground = GroundSet::full(n).unwrap();
        let r = common::random_prob_spec(&mut rng, &ground);
        for u_elems in common::non_empty_subsets(ground.elements()) {
            let u = gs(&u_elems);
            let m = r.marginalize(&u).unwrap();
            assert!((m.total() - 1.0).abs() <= WEIGHT_TOL);
            assert!(m.iter().all(|(_, v)| v >= 0.0));
        }
    }
}

#[test]
fn off_top_rate_mass_can_only_shrink_under_marginalization() {
    // Mass may migrate onto the single-block partition of U when a
    // partition restricts trivially; the rest never exceeds the total.
    let mut rng = common::rng(808);
    let ground = GroundSet::full(4).unwrap();
    let rho = common::random_rate_spec(&mut rng, &ground, 3.0);
    let total = rho.total_rate();
    for u_elems in common::non_empty_subsets(ground.elements()) {
        let u = gs(&u_elems);
        let m = rho.marginalize(&u).unwrap();
        let off_top: f64 = m
            .iter()
            .filter(|(p, _)| !p.is_top())
            .map(|(_, v)| v)
            .sum();
        assert!(off_top <= total + WEIGHT_TOL);
        assert!((m.total_rate() - total).abs() <= WEIGHT_TOL);
    }
}

#[test]
fn signed_measures_follow_the_literal_formula() {
    // A signed, non-zero measure is recombined literally with the total
    // variation norm in the scale factor.
    let space = common::random_space(&mut common::rng(909), 2, 2);
    let weights = vec![0.5, -0.25, 0.25, 0.1];
    let mu = ProductMeasure::new(space.clone(), weights).unwrap();
    let ground = gs(&[1, 2]);
    let bottom = SetPartition::bottom(ground);
    let r = recombinator(&bottom, &mu).unwrap();
    let norm = mu.total_variation_norm();
    let m1 = mu.marginal(&gs(&[1])).unwrap();
    let m2 = mu.marginal(&gs(&[2])).unwrap();
    let expected = tensor(&[m1, m2]).unwrap();
    for (got, want) in r.weights().iter().zip(expected.weights()) {
        assert!((got - want / norm).abs() <= WEIGHT_TOL);
    }
}
