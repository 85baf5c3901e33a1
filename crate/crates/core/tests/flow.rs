mod common;

use std::f64::consts::TAU;

use proptest::prelude::*;
use viscogeo::flow::{flow_step, perturbed_equator, relax, FlowOptions};
use viscogeo::{DiscreteClosedCurve, EnergyParams, ManifoldModel};

#[test]
fn perturbed_equator_relaxes_to_a_great_circle() {
    let c = perturbed_equator(64, 1e-2, 3, true).unwrap();
    let (out, rep) = relax(
        &c,
        &EnergyParams::new(0.0).unwrap(),
        &FlowOptions::default(),
    )
    .unwrap();
    assert!(rep.converged, "{rep:?}");
    assert!(rep.grad_norm < 1e-6);
    assert!((out.length() - TAU).abs() < 0.01 * TAU);
    // Every node lies on one plane through the origin.
    let n = out.node(0).to_vec();
    let m = out.node(16).to_vec();
    let normal = [
        n[1] * m[2] - n[2] * m[1],
        n[2] * m[0] - n[0] * m[2],
        n[0] * m[1] - n[1] * m[0],
    ];
    for x in out.nodes() {
        let d: f64 = x.iter().zip(&normal).map(|(a, b)| a * b).sum();
        assert!(d.abs() < 1e-4);
    }
}

#[test]
fn energy_history_never_increases() {
    let c = common::wiggly_sphere_curve(48, &[0.2, -0.1, 0.05]);
    for sigma in [0.0, 0.1] {
        let o = FlowOptions {
            max_iters: 200,
            ..FlowOptions::default()
        };
        let (_, rep) = relax(&c, &EnergyParams::new(sigma).unwrap(), &o).unwrap();
        assert!(rep.history.len() > 1);
        for w in rep.history.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }
}

#[test]
fn torus_loop_straightens_to_a_closed_geodesic() {
    let torus = ManifoldModel::flat_torus(vec![2.0, 1.0]);
    let c = DiscreteClosedCurve::from_fn(torus, 48, |th| {
        vec![2.0 * th / TAU, 0.5 + 0.1 * (2.0 * th).sin()]
    })
    .unwrap();
    let (out, rep) = relax(
        &c,
        &EnergyParams::new(0.0).unwrap(),
        &FlowOptions::default(),
    )
    .unwrap();
    assert!(rep.converged);
    assert!((out.length() - 2.0).abs() < 1e-6);
    let (_, closing) = out.unwrapped();
    assert!((closing[0] - 2.0).abs() < 1e-12 && closing[1].abs() < 1e-12);
}

#[test]
fn viscous_flow_approaches_the_critical_small_circle() {
    let sigma = 0.2f64;
    let target = (1.0 - 2.0 * sigma * sigma).sqrt() / sigma;
    let e = EnergyParams::new(sigma).unwrap();
    let c = DiscreteClosedCurve::latitude(0.9, 32).unwrap();
    let o = FlowOptions {
        max_iters: 20_000,
        grad_tol: 1e-9,
        ..FlowOptions::default()
    };
    let (out, rep) = relax(&c, &e, &o).unwrap();
    assert!(rep.energy < c.energy(&e));
    assert!(rep.grad_norm < 0.1 * c.first_variation(&e).max_norm());
    for k in out.geodesic_curvature().unwrap() {
        assert!((k - target).abs() < 0.02 * target, "{k} vs {target}");
    }
}

#[test]
fn short_curves_are_frozen() {
    let c = DiscreteClosedCurve::latitude(0.99, 32).unwrap();
    let o = FlowOptions {
        length_floor: 1.0,
        ..FlowOptions::default()
    };
    let (out, rep) = relax(&c, &EnergyParams::new(0.0).unwrap(), &o).unwrap();
    assert!(rep.frozen);
    assert_eq!(rep.iters, 0);
    assert_eq!(out, c);
}

#[test]
fn displacement_cap_is_respected() {
    let c = common::wiggly_sphere_curve(48, &[0.3]);
    let o = FlowOptions {
        max_iters: 1,
        max_displacement: Some(1e-3),
        step0: 10.0,
        ..FlowOptions::default()
    };
    let (out, _) = relax(&c, &EnergyParams::new(0.0).unwrap(), &o).unwrap();
    assert!(c.max_node_distance(&out).unwrap() <= 1e-3 * (1.0 + 1e-9));
}

#[test]
fn resampling_during_flow_keeps_spacing_even() {
    let c = common::wiggly_sphere_curve(64, &[0.2, 0.1]);
    let o = FlowOptions {
        max_iters: 100,
        resample_every: 10,
        ..FlowOptions::default()
    };
    let (out, rep) = relax(&c, &EnergyParams::new(0.05).unwrap(), &o).unwrap();
    assert!(!rep.resampled_at.is_empty());
    assert!(out.spacing_spread().unwrap() < 0.05);
}

#[test]
fn invalid_inputs_rejected() {
    let c = DiscreteClosedCurve::equator(16).unwrap();
    let e = EnergyParams::new(0.0).unwrap();
    assert!(flow_step(&c, &e, -1.0).is_err());
    assert!(relax(
        &c,
        &e,
        &FlowOptions {
            backtrack: 1.5,
            ..FlowOptions::default()
        }
    )
    .is_err());
    assert!(perturbed_equator(15, 0.01, 1, true).is_err());
    assert!(toml_like_unknown_field_rejected());
}

fn toml_like_unknown_field_rejected() -> bool {
    serde_json::from_str::<FlowOptions>(r#"{"max_iters": 10, "bogus": 1}"#).is_err()
        && serde_json::from_str::<FlowOptions>(r#"{"max_iters": 10}"#).is_ok()
}

#[test]
fn same_seed_same_curve() {
    let a = perturbed_equator(32, 0.01, 9, false).unwrap();
    let b = perturbed_equator(32, 0.01, 9, false).unwrap();
    let d = perturbed_equator(32, 0.01, 10, false).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, d);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn small_steps_decrease_energy(c1 in -0.2f64..0.2, c2 in -0.2f64..0.2, sigma in 0.0f64..0.3) {
        let c = common::wiggly_sphere_curve(32, &[c1, c2, 0.05]);
        let e = EnergyParams::new(sigma).unwrap();
        let next = flow_step(&c, &e, 1e-5).unwrap();
        prop_assert!(next.energy(&e) <= c.energy(&e));
    }

    #[test]
    fn cutoff_is_a_monotone_ramp(floor in 0.1f64..3.0, a in 0.0f64..10.0, b in 0.0f64..10.0) {
        let o = FlowOptions { length_floor: floor, ..FlowOptions::default() };
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(o.cutoff(lo) <= o.cutoff(hi));
        prop_assert!((0.0..=1.0).contains(&o.cutoff(lo)));
        prop_assert_eq!(o.cutoff(floor), 0.0);
        prop_assert_eq!(o.cutoff(1.5 * floor), 1.0);
    }
}
