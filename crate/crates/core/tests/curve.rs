mod common;

use std::f64::consts::TAU;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use viscogeo::{DiscreteClosedCurve, EnergyParams, ManifoldModel};

fn random_sphere_curve(rng: &mut ChaCha8Rng, n: usize) -> DiscreteClosedCurve {
    let coeffs: Vec<f64> = (0..3).map(|_| rng.random_range(-0.15..0.15)).collect();
    common::wiggly_sphere_curve(n, &coeffs)
}

#[test]
fn gradient_matches_finite_differences_on_the_sphere() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..4 {
        let c = random_sphere_curve(&mut rng, 64);
        for sigma in [0.0, 0.1] {
            let e = EnergyParams::new(sigma).unwrap();
            let g = c.first_variation(&e);
            let fd = common::fd_gradient(&c, &e, 1e-6);
            let err = g
                .as_slice()
                .iter()
                .zip(&fd)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-5, "sigma {sigma}: max error {err:e}");
        }
    }
}

#[test]
fn gradient_matches_finite_differences_on_torus_and_three_sphere() {
    let torus = ManifoldModel::flat_torus(vec![1.0, 1.5]);
    let c = DiscreteClosedCurve::from_fn(torus, 40, |th| {
        vec![0.3 * th.cos() + 0.95, 0.4 * th.sin() + 1.4]
    })
    .unwrap();
    let s3 = DiscreteClosedCurve::from_fn(ManifoldModel::sphere(3), 40, |th| {
        vec![th.cos(), th.sin(), 0.3 * (2.0 * th).sin(), 0.2]
    })
    .unwrap();
    for curve in [c, s3] {
        let e = EnergyParams::new(0.2).unwrap();
        let g = curve.first_variation(&e);
        let fd = common::fd_gradient(&curve, &e, 1e-6);
        let err = g
            .as_slice()
            .iter()
            .zip(&fd)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-5, "max error {err:e}");
    }
}

#[test]
fn latitude_length_and_curvature_converge() {
    let h = 0.6f64;
    let r = (1.0 - h * h).sqrt();
    let exact_len = TAU * r;
    let exact_kappa = h / r;
    let mut prev = (f64::INFINITY, f64::INFINITY);
    for n in [32, 64, 128, 256] {
        let c = DiscreteClosedCurve::latitude(h, n).unwrap();
        let len_err = (c.length() - exact_len).abs();
        let kap_err = c
            .geodesic_curvature()
            .unwrap()
            .iter()
            .map(|k| (k - exact_kappa).abs())
            .fold(0.0, f64::max);
        // Second order: halving the step divides the error by about four.
        assert!(len_err < prev.0 / 3.5, "n {n}: length error {len_err:e}");
        assert!(kap_err < prev.1 / 3.5, "n {n}: curvature error {kap_err:e}");
        prev = (len_err, kap_err);
    }
}

#[test]
fn energy_of_a_circle_matches_the_integral() {
    let h = 0.4f64;
    let r = (1.0 - h * h).sqrt();
    let sigma = 0.3;
    let kappa = h / r;
    let exact = TAU * r * (1.0 + sigma * sigma * kappa * kappa);
    let c = DiscreteClosedCurve::latitude(h, 2048).unwrap();
    assert!((c.energy(&EnergyParams::new(sigma).unwrap()) - exact).abs() < 1e-5);
}

#[test]
fn resampling_equalizes_spacing_and_keeps_the_shape() {
    // Nodes bunched toward theta = 0.
    let torus = ManifoldModel::flat_torus(vec![2.0, 2.0]);
    let pts: Vec<Vec<f64>> = (0..80)
        .map(|i| {
            let s = i as f64 / 80.0;
            let th = TAU * (s + 0.08 * (TAU * s).sin());
            vec![1.0 + 0.5 * th.cos(), 1.0 + 0.5 * th.sin()]
        })
        .collect();
    let c = DiscreteClosedCurve::from_points_projected(torus, pts).unwrap();
    assert!(c.spacing_spread().unwrap() > 0.3);
    let r = c.resample_arclength(120).unwrap();
    assert!(r.spacing_spread().unwrap() < 1e-10);
    for x in r.nodes() {
        let rad = ((x[0] - 1.0).powi(2) + (x[1] - 1.0).powi(2)).sqrt();
        assert!((rad - 0.5).abs() < 1e-4);
    }
}

#[test]
fn resampling_a_sphere_curve_stays_on_the_sphere() {
    let c = common::wiggly_sphere_curve(96, &[0.1, -0.05]);
    let r = c.resample_arclength(64).unwrap();
    assert!(r.spacing_spread().unwrap() < 1e-10);
    assert!((r.length() - c.length()).abs() < 1e-3);
}

#[test]
fn el_residual_of_the_critical_circle_shrinks_under_refinement() {
    let sigma = 0.2f64;
    let kappa = (1.0 - 2.0 * sigma * sigma).sqrt() / sigma;
    let height = kappa / (1.0 + kappa * kappa).sqrt();
    let e = EnergyParams::new(sigma).unwrap();
    let coarse = DiscreteClosedCurve::latitude(height, 64)
        .unwrap()
        .el_residual(&e)
        .unwrap();
    let fine = DiscreteClosedCurve::latitude(height, 256)
        .unwrap()
        .el_residual(&e)
        .unwrap();
    assert!(fine < coarse / 4.0, "{coarse:e} -> {fine:e}");
    // A non-critical circle has a residual of order one.
    let off = DiscreteClosedCurve::latitude(0.5, 256)
        .unwrap()
        .el_residual(&e)
        .unwrap();
    assert!(off > 100.0 * fine);
}

#[test]
fn rejects_bad_curves() {
    let s = ManifoldModel::unit_sphere();
    assert!(DiscreteClosedCurve::new(s.clone(), vec![vec![1.0, 0.0, 0.0]; 4]).is_err());
    let mut off = DiscreteClosedCurve::equator(16).unwrap().nodes();
    off[3][2] = 0.1;
    assert!(DiscreteClosedCurve::new(s.clone(), off).is_err());
    let mut dup = DiscreteClosedCurve::equator(16).unwrap().nodes();
    dup[4] = dup[3].clone();
    assert!(DiscreteClosedCurve::new(s, dup).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn energy_is_invariant_under_rotation(a in 0.0f64..TAU, b in 0.0f64..3.0, g in 0.0f64..TAU, sigma in 0.0f64..0.5) {
        let c = common::wiggly_sphere_curve(48, &[0.1, 0.05, -0.08]);
        let rot = common::rotation(a, b, g);
        let moved = DiscreteClosedCurve::from_points_projected(
            ManifoldModel::unit_sphere(),
            c.nodes().iter().map(|x| common::apply(&rot, x)).collect(),
        ).unwrap();
        let e = EnergyParams::new(sigma).unwrap();
        prop_assert!((c.energy(&e) - moved.energy(&e)).abs() < 1e-11);
    }

    #[test]
    fn energy_is_invariant_under_relabelling(shift in 0usize..48, reverse in any::<bool>(), sigma in 0.0f64..0.5) {
        let c = common::wiggly_sphere_curve(48, &[0.1, -0.05, 0.02]);
        let mut nodes = c.nodes();
        nodes.rotate_left(shift);
        if reverse {
            nodes.reverse();
        }
        let d = DiscreteClosedCurve::new(ManifoldModel::unit_sphere(), nodes).unwrap();
        let e = EnergyParams::new(sigma).unwrap();
        prop_assert!((c.energy(&e) - d.energy(&e)).abs() < 1e-12);
    }

    #[test]
    fn energy_dominates_length_and_gradient_is_tangent(c1 in -0.2f64..0.2, c2 in -0.2f64..0.2, sigma in 0.0f64..1.0) {
        let c = common::wiggly_sphere_curve(40, &[c1, c2]);
        let e = EnergyParams::new(sigma).unwrap();
        let (l, b) = c.energy_parts(&e);
        prop_assert!(b >= 0.0);
        prop_assert!((c.energy(&e) - l - b).abs() < 1e-12);
        prop_assert!(c.energy(&e) >= c.length());
        let g = c.first_variation(&e);
        for i in 0..c.len() {
            let x = c.node(i);
            let dot: f64 = g.get(i).iter().zip(x).map(|(a, b)| a * b).sum();
            prop_assert!(dot.abs() < 1e-12);
        }
    }

    #[test]
    fn torus_energy_is_invariant_under_lattice_translation(k in -2i32..3, j in -2i32..3, sigma in 0.0f64..0.5) {
        let torus = ManifoldModel::flat_torus(vec![1.0, 1.0]);
        let c = DiscreteClosedCurve::from_fn(torus.clone(), 32, |th| vec![0.5 + 0.3 * th.cos(), 0.5 + 0.2 * th.sin()]).unwrap();
        let moved = DiscreteClosedCurve::from_points_projected(
            torus,
            c.nodes().iter().map(|x| vec![x[0] + k as f64 + 0.9, x[1] + j as f64 - 0.7]).collect(),
        ).unwrap();
        let e = EnergyParams::new(sigma).unwrap();
        prop_assert!((c.energy(&e) - moved.energy(&e)).abs() < 1e-11);
    }
}
