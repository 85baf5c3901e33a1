//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use viscogeo::{DiscreteClosedCurve, EnergyParams};

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Classical RK4 for `y' = f(t, y)` from `t0` to `t1` in `steps` steps.
pub fn rk4<F: Fn(f64, &[f64]) -> Vec<f64>>(
    f: F,
    y0: &[f64],
    t0: f64,
    t1: f64,
    steps: usize,
) -> Vec<f64> {
    let h = (t1 - t0) / steps as f64;
    let mut y = y0.to_vec();
    let shift = |y: &[f64], k: &[f64], c: f64| -> Vec<f64> {
        y.iter().zip(k).map(|(a, b)| a + c * b).collect()
    };
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        let k1 = f(t, &y);
        let k2 = f(t + 0.5 * h, &shift(&y, &k1, 0.5 * h));
        let k3 = f(t + 0.5 * h, &shift(&y, &k2, 0.5 * h));
        let k4 = f(t + h, &shift(&y, &k3, h));
        for i in 0..y.len() {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

/// Central finite differences of the energy with respect to each ambient
/// coordinate of each node. Nodes are not re-projected; the energy
/// normalizes sphere nodes internally.
pub fn fd_gradient(c: &DiscreteClosedCurve, e: &EnergyParams, h: f64) -> Vec<f64> {
    let base = c.flat_nodes().to_vec();
    let mut out = vec![0.0; base.len()];
    for k in 0..base.len() {
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus[k] += h;
        minus[k] -= h;
        let ep = energy_unchecked(c, &plus, e);
        let em = energy_unchecked(c, &minus, e);
        out[k] = (ep - em) / (2.0 * h);
    }
    out
}

/// Energy of the curve with nodes replaced by `nodes`, re-projected onto the
/// manifold first so the construction checks pass.
fn energy_unchecked(c: &DiscreteClosedCurve, nodes: &[f64], e: &EnergyParams) -> f64 {
    let d = c.dim();
    let pts: Vec<Vec<f64>> = nodes.chunks(d).map(|r| r.to_vec()).collect();
    let moved =
        DiscreteClosedCurve::from_points_projected(c.manifold().clone(), pts).expect("projectable");
    moved.energy(e)
}

/// Random 3x3 rotation from three angles.
pub fn rotation(a: f64, b: f64, c: f64) -> [[f64; 3]; 3] {
    let rz = |t: f64| {
        [
            [t.cos(), -t.sin(), 0.0],
            [t.sin(), t.cos(), 0.0],
            [0.0, 0.0, 1.0],
        ]
    };
    let rx = |t: f64| {
        [
            [1.0, 0.0, 0.0],
            [0.0, t.cos(), -t.sin()],
            [0.0, t.sin(), t.cos()],
        ]
    };
    mat_mul(&mat_mul(&rz(a), &rx(b)), &rz(c))
}

fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut o = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            o[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    o
}

pub fn apply(r: &[[f64; 3]; 3], x: &[f64]) -> Vec<f64> {
    (0..3)
        .map(|i| (0..3).map(|k| r[i][k] * x[k]).sum())
        .collect()
}

/// A smooth closed curve on the unit sphere: a latitude circle with a few
/// low-frequency wiggles.
pub fn wiggly_sphere_curve(n: usize, coeffs: &[f64]) -> DiscreteClosedCurve {
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let th = std::f64::consts::TAU * i as f64 / n as f64;
            let mut z = 0.2;
            for (j, a) in coeffs.iter().enumerate() {
                z += a * ((j + 1) as f64 * th + j as f64).sin();
            }
            vec![th.cos(), th.sin(), z]
        })
        .collect();
    DiscreteClosedCurve::from_points_projected(viscogeo::ManifoldModel::unit_sphere(), pts)
        .expect("valid curve")
}
