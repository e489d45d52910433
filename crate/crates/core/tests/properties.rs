use std::f64::consts::PI;

use discinterp::constants::{interp_constant, witness_lower_bound, ConstantOptions};
use discinterp::discfun::{compose_with_blaschke, BlaschkeFactor, CoeffSeries, SigmaSet, C64};
use discinterp::extremal::{carleson_constant, pick_matrix, pick_min_norm, PickProblem};
use discinterp::linalg::lambda_min;
use discinterp::modelspace::{malmquist_basis, project, t_operator_norm};
use discinterp::spaces::{eval_functional_norm, gram_matrix, norm, power_inequality_check, sup_norm, SpaceSpec};
use proptest::prelude::*;

fn disc_point(r_max: f64) -> impl Strategy<Value = C64> {
    (0.0..r_max, -PI..PI).prop_map(|(r, t)| C64::from_polar(r, t))
}

fn complex() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| C64::new(a, b))
}

fn poly(max_len: usize) -> impl Strategy<Value = CoeffSeries> {
    prop::collection::vec(complex(), 1..=max_len).prop_map(CoeffSeries::new)
}

fn separated(points: Vec<C64>, gap: f64) -> bool {
    points
        .iter()
        .enumerate()
        .all(|(i, a)| points[i + 1..].iter().all(|b| (a - b).norm() >= gap))
}

fn hilbert_spaces() -> Vec<SpaceSpec> {
    vec![
        SpaceSpec::hardy2(),
        SpaceSpec::SeqWeighted { p: 2.0, alpha: 1.5 },
        SpaceSpec::SeqWeighted { p: 2.0, alpha: 2.0 },
        SpaceSpec::BergmanRadial { p: 2.0, beta: 0.0 },
        SpaceSpec::BergmanRadial { p: 2.0, beta: 1.5 },
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn blaschke_products_are_unimodular_on_the_circle(zeros in prop::collection::vec(disc_point(0.95), 1..8), t in -PI..PI) {
        let b = SigmaSet::new(zeros).unwrap().blaschke();
        prop_assert!((b.eval(C64::from_polar(1.0, t)).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn blaschke_factor_is_an_involution(lambda in disc_point(0.99), z in disc_point(0.99)) {
        let b = BlaschkeFactor::new(lambda).unwrap();
        prop_assert!((b.eval(b.eval(z)) - z).norm() < 1e-10);
    }

    #[test]
    fn composing_twice_with_a_factor_is_the_identity(lambda in disc_point(0.7), f in poly(8)) {
        let once = compose_with_blaschke(&f, lambda, 400).unwrap();
        let twice = compose_with_blaschke(&once, lambda, 8).unwrap();
        for k in 0..8 {
            prop_assert!((twice.coeff(k) - f.coeff(k)).norm() < 1e-9);
        }
    }

    #[test]
    fn gram_matrices_are_positive_definite(points in prop::collection::vec(disc_point(0.9), 1..6)) {
        prop_assume!(separated(points.clone(), 0.05));
        let sigma = SigmaSet::new(points).unwrap();
        for space in hilbert_spaces() {
            let g = gram_matrix(&space, &sigma).unwrap();
            prop_assert!(g.min_eigenvalue > 0.0, "{:?}", space);
        }
    }

    #[test]
    fn point_evaluation_is_bounded_by_the_functional_norm(f in poly(12), lambda in disc_point(0.95)) {
        for space in hilbert_spaces().into_iter().chain([SpaceSpec::Hardy { p: 4.0 }, SpaceSpec::Hardy { p: 1.0 }]) {
            let phi = eval_functional_norm(&space, lambda.norm()).unwrap();
            let lhs = f.eval(lambda).norm();
            let rhs = phi * norm(&space, &f).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-9), "{:?}: {} > {}", space, lhs, rhs);
        }
    }

    #[test]
    fn power_inequality_holds(f in poly(10), which in 0usize..3) {
        let alpha = [1.0, 1.5, 2.0][which];
        let (lhs, rhs) = power_inequality_check(alpha, &f).unwrap();
        prop_assert!(lhs <= rhs + 1e-9 * rhs.max(1.0));
    }

    #[test]
    fn projection_ignores_the_order_of_sigma(points in prop::collection::vec(disc_point(0.9), 2..6), f in poly(10)) {
        let a = SigmaSet::new(points.clone()).unwrap();
        let mut reversed = points;
        reversed.reverse();
        let b = SigmaSet::new(reversed).unwrap();
        let (ta, tb) = (project(&malmquist_basis(&a, None).unwrap(), &f), project(&malmquist_basis(&b, None).unwrap(), &f));
        let len = ta.len().max(tb.len());
        for k in 0..len {
            prop_assert!((ta.coeff(k) - tb.coeff(k)).norm() < 1e-10);
        }
    }

    #[test]
    fn projection_respects_the_t_norm(points in prop::collection::vec(disc_point(0.8), 1..5), f in poly(10)) {
        let sigma = SigmaSet::new(points).unwrap();
        let tf = project(&malmquist_basis(&sigma, None).unwrap(), &f);
        let t = t_operator_norm(&SpaceSpec::hardy2(), &sigma).unwrap();
        prop_assert!(sup_norm(&tf) <= t * f.h2_norm_sq().sqrt() * (1.0 + 1e-8));
    }

    #[test]
    fn pick_value_scales_rotates_and_certifies(
        nodes in prop::collection::vec(disc_point(0.85), 1..5),
        values in prop::collection::vec(complex(), 5),
        s in 0.1..10.0f64,
        t in -PI..PI,
    ) {
        prop_assume!(separated(nodes.clone(), 0.05));
        let values = values[..nodes.len()].to_vec();
        prop_assume!(values.iter().any(|w| w.norm() > 1e-3));
        let base = pick_min_norm(&PickProblem::new(nodes.clone(), values.clone()).unwrap(), 1e-11).unwrap().value;

        let scaled: Vec<C64> = values.iter().map(|w| w * s).collect();
        let v = pick_min_norm(&PickProblem::new(nodes.clone(), scaled).unwrap(), 1e-11).unwrap().value;
        prop_assert!((v - s * base).abs() <= 1e-8 * s * base);

        let u = C64::from_polar(1.0, t);
        let rotated: Vec<C64> = nodes.iter().map(|z| z * u).collect();
        let v = pick_min_norm(&PickProblem::new(rotated, values.clone()).unwrap(), 1e-11).unwrap().value;
        prop_assert!((v - base).abs() <= 1e-8 * base);

        let p = pick_matrix(&nodes, &values, base);
        let scale = base * base + values.iter().map(|w| w.norm_sqr()).fold(0.0, f64::max);
        prop_assert!(lambda_min(&p) >= -1e-9 * scale / (1.0 - 0.85f64.powi(2)));
    }

    #[test]
    fn adding_a_node_never_lowers_the_pick_value(
        nodes in prop::collection::vec(disc_point(0.85), 2..5),
        values in prop::collection::vec(complex(), 5),
    ) {
        prop_assume!(separated(nodes.clone(), 0.05));
        let values = values[..nodes.len()].to_vec();
        let k = nodes.len();
        let full = pick_min_norm(&PickProblem::new(nodes.clone(), values.clone()).unwrap(), 1e-11).unwrap().value;
        let part = pick_min_norm(&PickProblem::new(nodes[..k - 1].to_vec(), values[..k - 1].to_vec()).unwrap(), 1e-11)
            .unwrap()
            .value;
        prop_assert!(part <= full * (1.0 + 1e-8) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn constant_is_rotation_invariant(points in prop::collection::vec(disc_point(0.7), 1..4), t in -PI..PI) {
        prop_assume!(separated(points.clone(), 0.1));
        let sigma = SigmaSet::new(points).unwrap();
        let opts = ConstantOptions::default();
        let h2 = SpaceSpec::hardy2();
        let a = interp_constant(&h2, &sigma, &opts).unwrap().value;
        let b = interp_constant(&h2, &sigma.rotated(C64::from_polar(1.0, t)).unwrap(), &opts).unwrap().value;
        prop_assert!((a - b).abs() <= 2.0 * 1e-6 * a, "{} vs {}", a, b);
    }
}

#[test]
fn witness_is_nondecreasing_in_r() {
    let h2 = SpaceSpec::hardy2();
    for n in [2, 5, 12] {
        let values: Vec<f64> = (0..10)
            .map(|i| witness_lower_bound(&h2, C64::new(0.09 * i as f64, 0.0), n).unwrap())
            .collect();
        for w in values.windows(2) {
            assert!(w[1] >= w[0] * (1.0 - 1e-10), "n = {n}: {values:?}");
        }
    }
}

#[test]
fn carleson_route_bounds_the_constant_when_stable() {
    let h2 = SpaceSpec::hardy2();
    let sets = [
        vec![C64::new(0.5, 0.0), C64::new(-0.5, 0.0)],
        vec![C64::new(0.3, 0.3), C64::new(-0.6, 0.1), C64::new(0.1, -0.7)],
        vec![
            C64::new(0.7, 0.0),
            C64::new(0.0, 0.7),
            C64::new(-0.7, 0.0),
            C64::new(0.0, -0.7),
        ],
    ];
    let mut checked = 0;
    for pts in sets {
        let sigma = SigmaSet::new(pts).unwrap();
        let small = carleson_constant(&sigma, 1e-10, 32, 1).unwrap().value;
        let large = carleson_constant(&sigma, 1e-10, 64, 1).unwrap().value;
        if (large - small).abs() >= 1e-4 {
            continue;
        }
        checked += 1;
        let phi = sigma
            .points()
            .iter()
            .map(|z| eval_functional_norm(&h2, z.norm()).unwrap())
            .fold(0.0, f64::max);
        let bound = large * phi;
        let est = interp_constant(&h2, &sigma, &ConstantOptions::default()).unwrap().value;
        assert!(est <= bound + 1e-6, "{est} > {bound}");
    }
    assert!(checked > 0);
}
