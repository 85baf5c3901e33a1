mod common;

use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use viscogeo::index::{hessian, length_second_variation, morse_index, semicontinuity_report};
use viscogeo::{DiscreteClosedCurve, EnergyParams, ManifoldModel, NodeField};

/// Normal field `cos(j theta + phase) e_3` on the equator.
fn normal_mode(n: usize, j: usize, phase: f64) -> NodeField {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let th = TAU * i as f64 / n as f64;
            vec![0.0, 0.0, (j as f64 * th + phase).cos()]
        })
        .collect();
    NodeField::from_rows(&rows).unwrap()
}

/// Second difference of the energy along the retraction `x + t v`.
fn second_difference(c: &DiscreteClosedCurve, v: &NodeField, e: &EnergyParams, t: f64) -> f64 {
    let shifted = |s: f64| {
        let pts: Vec<Vec<f64>> = (0..c.len())
            .map(|i| {
                c.node(i)
                    .iter()
                    .zip(v.get(i))
                    .map(|(x, d)| x + s * d)
                    .collect()
            })
            .collect();
        DiscreteClosedCurve::from_points_projected(c.manifold().clone(), pts)
            .unwrap()
            .energy(e)
    };
    (shifted(t) - 2.0 * c.energy(e) + shifted(-t)) / (t * t)
}

#[test]
fn quadratic_form_matches_second_differences_at_critical_curves() {
    let c = DiscreteClosedCurve::equator(64).unwrap();
    for sigma in [0.0, 0.1] {
        let e = EnergyParams::new(sigma).unwrap();
        let h = hessian(&c, &e).unwrap();
        assert!(h.near_critical);
        assert!(h.symmetry_defect() < 1e-10);
        for (j, phase) in [(0, 0.0), (1, 0.3), (2, 1.0), (5, 0.2)] {
            let v = normal_mode(64, j, phase);
            let q = h.quadratic_form(&v);
            let fd = second_difference(&c, &v, &e, 1e-4);
            assert!(
                (q - fd).abs() < 1e-5 * (1.0 + q.abs()),
                "sigma {sigma} j {j}: {q} vs {fd}"
            );
        }
    }
}

#[test]
fn second_variation_of_length_matches_the_continuum() {
    let n = 512;
    let c = DiscreteClosedCurve::equator(n).unwrap();
    let h = hessian(&c, &EnergyParams::new(0.0).unwrap()).unwrap();
    for j in 0..4 {
        let v = normal_mode(n, j, 0.0);
        // ∫ (v'² - v²) ds over a great circle.
        let continuum = if j == 0 {
            -TAU
        } else {
            PI * (j * j) as f64 - PI
        };
        let ls = length_second_variation(&c, &v).unwrap();
        let q = h.quadratic_form(&v);
        assert!(
            (ls - continuum).abs() < 1e-3 * (1.0 + continuum.abs()),
            "j {j}: {ls} vs {continuum}"
        );
        assert!(
            (q - continuum).abs() < 1e-3 * (1.0 + continuum.abs()),
            "j {j}: {q} vs {continuum}"
        );
    }
}

#[test]
fn covers_of_the_equator() {
    for n in [128, 256] {
        for (k, expect) in [(1, 1), (2, 3), (3, 5)] {
            let c = DiscreteClosedCurve::equator_cover(k, n).unwrap();
            let r = morse_index(
                &hessian(&c, &EnergyParams::new(0.0).unwrap()).unwrap(),
                None,
            )
            .unwrap();
            assert_eq!(r.index, expect, "k {k} n {n}");
            // Tangential slides plus the two rotations moving the plane.
            assert_eq!(r.zero_modes, n + 2);
        }
    }
}

#[test]
fn viscous_equator_keeps_index_one() {
    let c = DiscreteClosedCurve::equator(128).unwrap();
    let r = morse_index(
        &hessian(&c, &EnergyParams::new(0.1).unwrap()).unwrap(),
        None,
    )
    .unwrap();
    assert_eq!(r.index, 1);
}

#[test]
fn torus_geodesics_are_stable() {
    let torus = ManifoldModel::flat_torus(vec![1.0, 2.0]);
    let c = DiscreteClosedCurve::from_fn(torus, 128, |th| vec![th / TAU, 0.7]).unwrap();
    let h = hessian(&c, &EnergyParams::new(0.0).unwrap()).unwrap();
    assert!(h.near_critical);
    let r = morse_index(&h, None).unwrap();
    assert_eq!(r.index, 0);
}

#[test]
fn off_critical_curves_are_flagged() {
    let c = DiscreteClosedCurve::latitude(0.5, 64).unwrap();
    let h = hessian(&c, &EnergyParams::new(0.0).unwrap()).unwrap();
    assert!(!h.near_critical);
    assert!(h.grad_norm > 1e-3);
}

#[test]
fn index_is_lower_semicontinuous_along_viscous_equators() {
    let n = 96;
    let seq: Vec<(DiscreteClosedCurve, f64)> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&s| (DiscreteClosedCurve::equator(n).unwrap(), s))
        .collect();
    let limit = DiscreteClosedCurve::equator(n).unwrap();
    let r = semicontinuity_report(&seq, &limit, None).unwrap();
    assert!(r.holds);
    assert_eq!(r.limit_index, 1);
    assert!((r.limit_field_values[0] + TAU).abs() < 1e-2);
    for e in &r.entries {
        assert_eq!(e.index, 1);
        assert!(e.field_values[0] < 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn index_is_invariant_under_rotation(a in 0.0f64..TAU, b in 0.0f64..3.0, g in 0.0f64..TAU) {
        let rot = common::rotation(a, b, g);
        let c = DiscreteClosedCurve::equator(64).unwrap();
        let moved = DiscreteClosedCurve::from_points_projected(
            ManifoldModel::unit_sphere(),
            c.nodes().iter().map(|x| common::apply(&rot, x)).collect(),
        ).unwrap();
        let r = morse_index(&hessian(&moved, &EnergyParams::new(0.0).unwrap()).unwrap(), None).unwrap();
        prop_assert_eq!(r.index, 1);
        prop_assert_eq!(r.zero_modes, 66);
    }
}
