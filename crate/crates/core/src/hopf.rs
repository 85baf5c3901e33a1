//! Hopf fibration `S^3 -> S^2`, horizontal lifts of spherical curves and
//! the flat tori they sweep out under the circle action.
//!
//! Quaternions are `[real, i, j, k]`. The map `q -> q~` negates the
//! `i`-component (it fixes `1`, `j`, `k` and reverses products), and the
//! fibration is `p(q) = q~ q`, which lands in `span(1, j, k)`, identified
//! with `R^3` through the coordinates `(real, j, k)`. Left multiplication by
//! `e^{i theta}` preserves `p`, so fibres are the circles `e^{i theta} q`.
//!
//! A base curve parametrized by arclength `s in [0, L]` lifts to a
//! horizontal curve `Gamma(t)` with `t in [0, L/2]` and unit speed (the
//! fibration doubles lengths).

use serde::{Deserialize, Serialize};

use crate::critical::EllipticProfile;
use crate::curve::DiscreteClosedCurve;
use crate::error::{Error, Result};
use crate::manifold::ManifoldModel;
use crate::spectral;

pub type Quat = [f64; 4];

pub mod quat {
    use super::Quat;

    pub fn mul(a: &Quat, b: &Quat) -> Quat {
        [
            a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
            a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
            a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
            a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
        ]
    }

    pub fn conj(a: &Quat) -> Quat {
        [a[0], -a[1], -a[2], -a[3]]
    }

    /// The anti-automorphism fixing `1, j, k` and sending `i` to `-i`.
    pub fn tilde(a: &Quat) -> Quat {
        [a[0], -a[1], a[2], a[3]]
    }

    pub fn dot(a: &Quat, b: &Quat) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    pub fn norm(a: &Quat) -> f64 {
        dot(a, a).sqrt()
    }

    pub fn scale(a: &Quat, k: f64) -> Quat {
        [a[0] * k, a[1] * k, a[2] * k, a[3] * k]
    }

    pub fn sub(a: &Quat, b: &Quat) -> Quat {
        [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
    }

    /// `e^{i theta}`.
    pub fn exp_i(theta: f64) -> Quat {
        [theta.cos(), theta.sin(), 0.0, 0.0]
    }

    /// Logarithm of a unit quaternion, a pure quaternion.
    pub fn log_unit(a: &Quat) -> Quat {
        let v = (a[1] * a[1] + a[2] * a[2] + a[3] * a[3]).sqrt();
        if v == 0.0 {
            return [0.0; 4];
        }
        let angle = v.atan2(a[0]);
        [0.0, a[1] * angle / v, a[2] * angle / v, a[3] * angle / v]
    }

    /// Vector orthogonal to `a`, `b` and `c` in `R^4` (cofactor expansion).
    pub fn cross3(a: &Quat, b: &Quat, c: &Quat) -> Quat {
        let det3 = |i: usize, j: usize, k: usize| {
            a[i] * (b[j] * c[k] - b[k] * c[j]) - a[j] * (b[i] * c[k] - b[k] * c[i])
                + a[k] * (b[i] * c[j] - b[j] * c[i])
        };
        [det3(1, 2, 3), -det3(0, 2, 3), det3(0, 1, 3), -det3(0, 1, 2)]
    }
}

const ON_SPHERE_TOL: f64 = 1e-8;
/// Retained Fourier modes when differentiating fibre-averaged curvature twice.
const RESIDUAL_MODES: f64 = 16.0;
const RESIDUAL_KEEP: f64 = 1.0 / 16.0;

fn base_quat(x: &[f64]) -> Quat {
    [x[0], 0.0, x[1], x[2]]
}

/// Projects a unit quaternion to the 2-sphere.
pub fn hopf_projection(q: &Quat) -> Result<[f64; 3]> {
    let r = quat::norm(q);
    if (r - 1.0).abs() > ON_SPHERE_TOL {
        return Err(Error::InvalidInput(format!("|q| = {r} is not 1")));
    }
    let p = quat::mul(&quat::tilde(q), q);
    Ok([p[0], p[2], p[3]])
}

/// A point of the fibre over `x`, `(1 + x)/|1 + x|` (undefined at `-1`).
pub fn section(x: &[f64; 3]) -> Result<Quat> {
    let q = [1.0 + x[0], 0.0, x[1], x[2]];
    let r = quat::norm(&q);
    if r < 1e-8 {
        return Err(Error::Degenerate(
            "section is singular at (-1, 0, 0)".into(),
        ));
    }
    Ok(quat::scale(&q, 1.0 / r))
}

/// Discrete horizontal lift of a polygon on `S^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftedCurve {
    /// `Gamma_i` over base node `i`.
    pub points: Vec<Quat>,
    /// Lift parameter of each point (half the base arclength).
    pub times: Vec<f64>,
    pub closed: bool,
    /// For closed curves, `Gamma_N = e^{i phi} Gamma_0`; zero otherwise.
    pub holonomy: f64,
    /// `log(Gamma_{i+1} Gamma_i^{-1}) / dt_i`, the generator of each step.
    pub generators: Vec<Quat>,
    /// `max |p(Gamma_i) - gamma_i|`.
    pub projection_defect: f64,
}

impl LiftedCurve {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Point `i`, extended past the ends of a closed curve by the holonomy.
    fn point_wrapped(&self, i: isize) -> Quat {
        if !self.closed {
            return self.points[i as usize];
        }
        let n = self.points.len() as isize;
        let wraps = i.div_euclid(n);
        let r = i.rem_euclid(n) as usize;
        quat::mul(&quat::exp_i(self.holonomy * wraps as f64), &self.points[r])
    }

    /// Lift parameter of point `i`, extended past the ends of a closed curve.
    fn time_wrapped(&self, i: isize) -> f64 {
        if !self.closed {
            return self.times[i as usize];
        }
        let n = self.points.len() as isize;
        let period = self.times[n as usize];
        let wraps = i.div_euclid(n);
        self.times[i.rem_euclid(n) as usize] + wraps as f64 * period
    }
}

fn lift_points(base: &[[f64; 3]], closed: bool, basepoint: Option<Quat>) -> Result<LiftedCurve> {
    if base.len() < 3 {
        return Err(Error::InvalidInput(
            "need at least three base points".into(),
        ));
    }
    for x in base {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if (r - 1.0).abs() > ON_SPHERE_TOL {
            return Err(Error::InvalidInput("base point off the unit sphere".into()));
        }
    }
    let start = match basepoint {
        Some(q) => {
            let p = hopf_projection(&q)?;
            let d = ((p[0] - base[0][0]).powi(2)
                + (p[1] - base[0][1]).powi(2)
                + (p[2] - base[0][2]).powi(2))
            .sqrt();
            if d > 1e-6 {
                return Err(Error::InvalidInput(format!(
                    "basepoint projects {d:.3e} away from the curve start"
                )));
            }
            q
        }
        None => section(&base[0])?,
    };
    let steps = if closed { base.len() } else { base.len() - 1 };
    let mut points = vec![start];
    let mut times = vec![0.0];
    let mut generators = Vec::with_capacity(steps);
    let mut current = start;
    for s in 0..steps {
        let next_base = base_quat(&base[(s + 1) % base.len()]);
        let inv = quat::conj(&current);
        // Rotation of the fibre through Gamma_s onto the next fibre along
        // the shortest path: p(g Gamma_s) = gamma_{s+1} with g in span(1, j, k).
        let delta = quat::mul(&quat::mul(&quat::tilde(&inv), &next_base), &inv);
        let one_plus = [1.0 + delta[0], delta[1], delta[2], delta[3]];
        let r = quat::norm(&one_plus);
        if r < 1e-8 {
            return Err(Error::Degenerate(format!("antipodal base step at {s}")));
        }
        let g = quat::scale(&one_plus, 1.0 / r);
        let next = quat::mul(&g, &current);
        let next = quat::scale(&next, 1.0 / quat::norm(&next));
        let log = quat::log_unit(&g);
        let dt = quat::norm(&log);
        if dt == 0.0 {
            return Err(Error::Degenerate(format!("repeated base point at {s}")));
        }
        generators.push(quat::scale(&log, 1.0 / dt));
        times.push(times[s] + dt);
        points.push(next);
        current = next;
    }
    let mut holonomy = 0.0;
    if closed {
        let end = points.pop().expect("closed lift has an end point");
        let rel = quat::mul(&end, &quat::conj(&points[0]));
        holonomy = rel[1].atan2(rel[0]);
    }
    let mut projection_defect: f64 = 0.0;
    for (q, x) in points.iter().zip(base) {
        let p = hopf_projection(q)?;
        for k in 0..3 {
            projection_defect = projection_defect.max((p[k] - x[k]).abs());
        }
    }
    Ok(LiftedCurve {
        points,
        times,
        closed,
        holonomy,
        generators,
        projection_defect,
    })
}

fn sphere_points(c: &DiscreteClosedCurve) -> Result<Vec<[f64; 3]>> {
    if *c.manifold() != ManifoldModel::unit_sphere() {
        return Err(Error::Unsupported(
            "lifts need a curve on the unit 2-sphere".into(),
        ));
    }
    Ok((0..c.len())
        .map(|i| {
            let x = c.node(i);
            [x[0], x[1], x[2]]
        })
        .collect())
}

/// Horizontal lift of a closed curve on `S^2`, starting at `basepoint`
/// (default: the section over the first node).
pub fn horizontal_lift(c: &DiscreteClosedCurve, basepoint: Option<Quat>) -> Result<LiftedCurve> {
    lift_points(&sphere_points(c)?, true, basepoint)
}

/// Horizontal lift of an open polyline on `S^2`.
pub fn horizontal_lift_open(points: &[[f64; 3]], basepoint: Option<Quat>) -> Result<LiftedCurve> {
    lift_points(points, false, basepoint)
}

/// The surface `Gamma(t, theta) = e^{i theta} Gamma(t)` sampled on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopfTorusGrid {
    pub lifted: LiftedCurve,
    pub n_theta: usize,
    pub dtheta: f64,
    /// Row-major, `points[i * n_theta + j] = Gamma(t_i, theta_j)`.
    pub points: Vec<Quat>,
}

pub fn hopf_torus(lifted: &LiftedCurve, n_theta: usize) -> Result<HopfTorusGrid> {
    if n_theta < 8 {
        return Err(Error::InvalidInput("need at least 8 fibre samples".into()));
    }
    let dtheta = std::f64::consts::TAU / n_theta as f64;
    let fibre: Vec<Quat> = (0..n_theta)
        .map(|j| quat::exp_i(j as f64 * dtheta))
        .collect();
    let points = lifted
        .points
        .iter()
        .flat_map(|g| fibre.iter().map(move |e| quat::mul(e, g)))
        .collect();
    Ok(HopfTorusGrid {
        lifted: lifted.clone(),
        n_theta,
        dtheta,
        points,
    })
}

/// Checks of the grid against its defining properties.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    /// `max | |Gamma| - 1 |`.
    pub sphere_defect: f64,
    /// `max |Gamma(t, theta_j) - e^{i theta_j} Gamma(t, 0)|`.
    pub fibre_defect: f64,
    /// Length of the first fibre polygon.
    pub fibre_length: f64,
    /// `max | |d_t Gamma| - 1 |` from central differences.
    pub speed_t_defect: f64,
    /// `max | |d_theta Gamma| - 1 |` from spectral differences.
    pub speed_theta_defect: f64,
    /// `max |<d_t Gamma, d_theta Gamma>|`.
    pub orthogonality_defect: f64,
    /// For closed base curves, `|Gamma_N - Gamma_0|` (the lift need not close).
    pub closure_defect: f64,
}

impl HopfTorusGrid {
    pub fn rows(&self) -> usize {
        self.lifted.points.len()
    }

    pub fn point(&self, i: usize, j: usize) -> &Quat {
        &self.points[i * self.n_theta + j]
    }

    /// Rows whose `t`-neighbours exist (all rows of a closed lift).
    fn interior_rows(&self) -> std::ops::Range<usize> {
        if self.lifted.closed {
            0..self.rows()
        } else {
            1..self.rows() - 1
        }
    }

    /// Row `i` of the grid, extended past the ends of a closed lift.
    fn row(&self, i: isize) -> Vec<Quat> {
        let g = self.lifted.point_wrapped(i);
        (0..self.n_theta)
            .map(|j| quat::mul(&quat::exp_i(j as f64 * self.dtheta), &g))
            .collect()
    }

    pub fn report(&self) -> GridReport {
        let mut sphere_defect: f64 = 0.0;
        let mut fibre_defect: f64 = 0.0;
        for i in 0..self.rows() {
            let g0 = *self.point(i, 0);
            for j in 0..self.n_theta {
                let x = self.point(i, j);
                sphere_defect = sphere_defect.max((quat::norm(x) - 1.0).abs());
                let expect = quat::mul(&quat::exp_i(j as f64 * self.dtheta), &g0);
                fibre_defect = fibre_defect.max(quat::norm(&quat::sub(x, &expect)));
            }
        }
        let fibre_length = (0..self.n_theta)
            .map(|j| {
                let a = self.point(0, j);
                let b = self.point(0, (j + 1) % self.n_theta);
                2.0 * (0.5 * quat::norm(&quat::sub(b, a))).asin()
            })
            .sum();
        let mut speed_t_defect: f64 = 0.0;
        let mut speed_theta_defect: f64 = 0.0;
        let mut orthogonality_defect: f64 = 0.0;
        for i in self.interior_rows() {
            let d = self.row_derivatives(i as isize);
            for j in 0..self.n_theta {
                speed_t_defect = speed_t_defect.max((quat::norm(&d.xt[j]) - 1.0).abs());
                speed_theta_defect = speed_theta_defect.max((quat::norm(&d.xth[j]) - 1.0).abs());
                orthogonality_defect =
                    orthogonality_defect.max(quat::dot(&d.xt[j], &d.xth[j]).abs());
            }
        }
        let closure_defect = if self.lifted.closed {
            let end = self.lifted.point_wrapped(self.rows() as isize);
            quat::norm(&quat::sub(&end, &self.lifted.points[0]))
        } else {
            0.0
        };
        GridReport {
            sphere_defect,
            fibre_defect,
            fibre_length,
            speed_t_defect,
            speed_theta_defect,
            orthogonality_defect,
            closure_defect,
        }
    }

    /// Grid as CSV with header `i,j,x1,x2,x3,x4`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["i", "j", "x1", "x2", "x3", "x4"])?;
        for i in 0..self.rows() {
            for j in 0..self.n_theta {
                let x = self.point(i, j);
                w.write_record([
                    i.to_string(),
                    j.to_string(),
                    format!("{:e}", x[0]),
                    format!("{:e}", x[1]),
                    format!("{:e}", x[2]),
                    format!("{:e}", x[3]),
                ])?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }

    /// First and second derivatives of row `i`: central differences
    /// (non-uniform) in `t`, spectral differences along the fibres.
    fn row_derivatives(&self, i: isize) -> RowDerivatives {
        let a = self.lifted.time_wrapped(i) - self.lifted.time_wrapped(i - 1);
        let b = self.lifted.time_wrapped(i + 1) - self.lifted.time_wrapped(i);
        let prev = self.row(i - 1);
        let cur = self.row(i);
        let next = self.row(i + 1);
        let n = self.n_theta;
        let mut xt = vec![[0.0; 4]; n];
        let mut xtt = vec![[0.0; 4]; n];
        let denom = a * b * (a + b);
        for j in 0..n {
            for k in 0..4 {
                let (fm, f0, fp) = (prev[j][k], cur[j][k], next[j][k]);
                xt[j][k] = (a * a * fp - b * b * fm + (b * b - a * a) * f0) / denom;
                xtt[j][k] = 2.0 * (a * fp + b * fm - (a + b) * f0) / denom;
            }
        }
        let theta_diff = |rows: &[Quat]| -> Vec<Quat> {
            let comps: Vec<Vec<f64>> = (0..4)
                .map(|k| {
                    let vals: Vec<f64> = rows.iter().map(|q| q[k]).collect();
                    spectral::derivative(&vals, std::f64::consts::TAU, 1.0)
                })
                .collect();
            (0..n)
                .map(|j| [comps[0][j], comps[1][j], comps[2][j], comps[3][j]])
                .collect()
        };
        let xth = theta_diff(&cur);
        let xthth = theta_diff(&xth);
        let xtth = theta_diff(&xt);
        RowDerivatives {
            x: cur,
            xt,
            xtt,
            xth,
            xthth,
            xtth,
            dt: 0.5 * (a + b),
        }
    }
}

struct RowDerivatives {
    x: Vec<Quat>,
    xt: Vec<Quat>,
    xtt: Vec<Quat>,
    xth: Vec<Quat>,
    xthth: Vec<Quat>,
    xtth: Vec<Quat>,
    dt: f64,
}

/// Extrinsic geometry of the torus inside `S^3` at the interior rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusGeometry {
    /// Grid rows the values below refer to.
    pub rows: Vec<usize>,
    pub n_theta: usize,
    /// Mean curvature `tr(S)/2`, oriented to be non-negative on average.
    pub mean: Vec<f64>,
    /// Extrinsic Gauss curvature `det S`.
    pub gauss: Vec<f64>,
    /// `|II|² = tr(S²)`.
    pub second_form_sq: Vec<f64>,
    /// Area weights `sqrt(det g) · w_t · dtheta` (trapezoid in `t`).
    pub area_weight: Vec<f64>,
}

impl TorusGeometry {
    pub fn area(&self) -> f64 {
        self.area_weight.iter().sum()
    }

    /// Mean curvature averaged over each fibre.
    pub fn row_mean(&self) -> Vec<f64> {
        self.mean
            .chunks(self.n_theta)
            .map(|r| r.iter().sum::<f64>() / r.len() as f64)
            .collect()
    }
}

pub fn torus_geometry(t: &HopfTorusGrid) -> Result<TorusGeometry> {
    let rows: Vec<usize> = t.interior_rows().collect();
    if rows.len() < 2 {
        return Err(Error::Degenerate("torus grid has too few rows".into()));
    }
    let n = t.n_theta;
    let mut mean = Vec::with_capacity(rows.len() * n);
    let mut gauss = Vec::with_capacity(rows.len() * n);
    let mut second_form_sq = Vec::with_capacity(rows.len() * n);
    let mut area_weight = Vec::with_capacity(rows.len() * n);
    for (r, &i) in rows.iter().enumerate() {
        let d = t.row_derivatives(i as isize);
        // Trapezoid weights in t for an open lift, exact periodic sums otherwise.
        let wt = if !t.lifted.closed && (r == 0 || r == rows.len() - 1) {
            if r == 0 {
                0.5 * (t.lifted.times[i + 1] - t.lifted.times[i])
            } else {
                0.5 * (t.lifted.times[i] - t.lifted.times[i - 1])
            }
        } else {
            d.dt
        };
        for j in 0..n {
            let normal = quat::cross3(&d.x[j], &d.xt[j], &d.xth[j]);
            let nn = quat::norm(&normal);
            if nn < 1e-12 {
                return Err(Error::Degenerate(format!(
                    "no normal at grid point ({i}, {j})"
                )));
            }
            let normal = quat::scale(&normal, 1.0 / nn);
            let g11 = quat::dot(&d.xt[j], &d.xt[j]);
            let g12 = quat::dot(&d.xt[j], &d.xth[j]);
            let g22 = quat::dot(&d.xth[j], &d.xth[j]);
            let h11 = quat::dot(&d.xtt[j], &normal);
            let h12 = quat::dot(&d.xtth[j], &normal);
            let h22 = quat::dot(&d.xthth[j], &normal);
            let det_g = g11 * g22 - g12 * g12;
            // Shape operator S = g^{-1} h.
            let s11 = (g22 * h11 - g12 * h12) / det_g;
            let s12 = (g22 * h12 - g12 * h22) / det_g;
            let s21 = (g11 * h12 - g12 * h11) / det_g;
            let s22 = (g11 * h22 - g12 * h12) / det_g;
            mean.push(0.5 * (s11 + s22));
            gauss.push(s11 * s22 - s12 * s21);
            second_form_sq.push(s11 * s11 + s22 * s22 + 2.0 * s12 * s21);
            area_weight.push(det_g.sqrt() * wt * t.dtheta);
        }
    }
    if mean.iter().sum::<f64>() < 0.0 {
        for h in &mut mean {
            *h = -*h;
        }
    }
    Ok(TorusGeometry {
        rows,
        n_theta: n,
        mean,
        gauss,
        second_form_sq,
        area_weight,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusCurvatures {
    pub geometry: TorusGeometry,
    /// `max |H - kappa|` against the base curvature at the same row.
    pub mean_error: f64,
    /// `max |K + 1|`.
    pub gauss_error: f64,
    /// Largest spread of `H` along a fibre.
    pub theta_variation: f64,
}

/// Mean and Gauss curvature of the torus compared with the base curvature
/// (`base_kappa[i]` at the base node under grid row `i`) and with `-1`.
pub fn torus_curvatures(t: &HopfTorusGrid, base_kappa: &[f64]) -> Result<TorusCurvatures> {
    if base_kappa.len() != t.rows() {
        return Err(Error::InvalidInput(format!(
            "{} curvature samples for {} rows",
            base_kappa.len(),
            t.rows()
        )));
    }
    let geometry = torus_geometry(t)?;
    let n = t.n_theta;
    let mut mean_error: f64 = 0.0;
    let mut theta_variation: f64 = 0.0;
    for (r, &i) in geometry.rows.iter().enumerate() {
        let row = &geometry.mean[r * n..(r + 1) * n];
        let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        theta_variation = theta_variation.max(hi - lo);
        for h in row {
            mean_error = mean_error.max((h - base_kappa[i]).abs());
        }
    }
    let gauss_error = geometry
        .gauss
        .iter()
        .map(|k| (k + 1.0).abs())
        .fold(0.0, f64::max);
    Ok(TorusCurvatures {
        geometry,
        mean_error,
        gauss_error,
        theta_variation,
    })
}

/// `∫ (1 + sigma² H²) dA` over the grid.
pub fn willmore_sigma(t: &HopfTorusGrid, sigma: f64) -> Result<f64> {
    let g = torus_geometry(t)?;
    Ok(willmore_from(&g, sigma))
}

fn willmore_from(g: &TorusGeometry, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    g.mean
        .iter()
        .zip(&g.area_weight)
        .map(|(h, w)| (1.0 + s2 * h * h) * w)
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AreaEnergy {
    /// `∫ (1 + sigma² |II|²) dA` with `|II|²` from the grid.
    pub value: f64,
    /// The same integral with `|II|² = 2 + 4 kappa²` from the base curvature.
    pub from_base: f64,
    /// `2 sigma / sqrt(1 + 2 sigma²)`.
    pub sigma_prime: f64,
}

pub fn area_energy(t: &HopfTorusGrid, sigma: f64, base_kappa: &[f64]) -> Result<AreaEnergy> {
    if base_kappa.len() != t.rows() {
        return Err(Error::InvalidInput(
            "curvature samples do not match rows".into(),
        ));
    }
    let g = torus_geometry(t)?;
    let s2 = sigma * sigma;
    let n = g.n_theta;
    let mut value = 0.0;
    let mut from_base = 0.0;
    for (r, &i) in g.rows.iter().enumerate() {
        let k2 = base_kappa[i] * base_kappa[i];
        for j in 0..n {
            let idx = r * n + j;
            let w = g.area_weight[idx];
            value += (1.0 + s2 * g.second_form_sq[idx]) * w;
            from_base += (1.0 + s2 * (2.0 + 4.0 * k2)) * w;
        }
    }
    Ok(AreaEnergy {
        value,
        from_base,
        sigma_prime: 2.0 * sigma / (1.0 + 2.0 * s2).sqrt(),
    })
}

/// Max over fibre-averaged rows of `|2H - sigma² (Δ H + 2H(H² - 2K))|`.
///
/// The Laplacian uses the flat coordinates `(t, theta)`; `H` is constant
/// along fibres, so only the `t` part contributes. Closed lifts use low-pass
/// spectral differences in the row index, open lifts central differences.
pub fn willmore_residual(t: &HopfTorusGrid, sigma: f64) -> Result<f64> {
    let g = torus_geometry(t)?;
    let h = g.row_mean();
    let k: Vec<f64> = g
        .gauss
        .chunks(g.n_theta)
        .map(|r| r.iter().sum::<f64>() / r.len() as f64)
        .collect();
    let s2 = sigma * sigma;
    let m = h.len();
    let residual =
        |r: usize, lap: f64| 2.0 * h[r] - s2 * (lap + 2.0 * h[r] * (h[r] * h[r] - 2.0 * k[r]));
    let mut worst: f64 = 0.0;
    if t.lifted.closed {
        let period = t.lifted.times[m];
        let keep = (RESIDUAL_MODES / (m / 2) as f64).clamp(RESIDUAL_KEEP, 1.0);
        let idx_period = m as f64;
        let drift: Vec<f64> = (0..m)
            .map(|i| t.lifted.times[i] - period * i as f64 / idx_period)
            .collect();
        let dt_di: Vec<f64> = spectral::derivative(&drift, idx_period, 1.0)
            .into_iter()
            .map(|d| d + period / idx_period)
            .collect();
        let h_t: Vec<f64> = spectral::derivative(&h, idx_period, keep)
            .iter()
            .zip(&dt_di)
            .map(|(d, s)| d / s)
            .collect();
        let h_tt = spectral::derivative(&h_t, idx_period, keep);
        for r in 0..m {
            worst = worst.max(residual(r, h_tt[r] / dt_di[r]).abs());
        }
    } else {
        for r in 1..m - 1 {
            let i = g.rows[r] as isize;
            let a = t.lifted.time_wrapped(i) - t.lifted.time_wrapped(i - 1);
            let b = t.lifted.time_wrapped(i + 1) - t.lifted.time_wrapped(i);
            let lap = 2.0 * (a * h[r + 1] + b * h[r - 1] - (a + b) * h[r]) / (a * b * (a + b));
            worst = worst.max(residual(r, lap).abs());
        }
    }
    Ok(worst)
}

/// An open arc on `S^2` with prescribed geodesic curvature, sampled at
/// equal arclength steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpenBase {
    pub points: Vec<[f64; 3]>,
    /// Curvature at each point.
    pub kappa: Vec<f64>,
    pub ds: f64,
    /// Length of the arc between the first and last interior points.
    pub length: f64,
}

/// Integrates the Frenet system `x' = T, T' = -x + k n, n' = -k T` on the
/// unit sphere for one curvature profile, over `[-ds, L + ds]` with
/// `ds = L / segments`, so that the interior samples cover `[0, L]`.
pub fn elliptic_profile_base(profile: &EllipticProfile, segments: usize) -> Result<OpenBase> {
    if (profile.curvature - 1.0).abs() > 1e-12 {
        return Err(Error::Unsupported(
            "arcs are built on the unit sphere (K = 1)".into(),
        ));
    }
    if segments < 8 {
        return Err(Error::InvalidInput("need at least 8 segments".into()));
    }
    let length = profile.period_length();
    let ds = length / segments as f64;
    let substeps = 8;
    let h = ds / substeps as f64;
    let k = |s: f64| profile.curvature_profile(s);
    type State = [[f64; 3]; 3];
    let rhs = |s: f64, y: &State| -> State {
        let kv = k(s);
        let mut out = [[0.0; 3]; 3];
        for d in 0..3 {
            out[0][d] = y[1][d];
            out[1][d] = -y[0][d] + kv * y[2][d];
            out[2][d] = -kv * y[1][d];
        }
        out
    };
    let rk4 = |s: f64, y: &State, h: f64| -> State {
        let add = |a: &State, b: &State, f: f64| -> State {
            let mut o = *a;
            for r in 0..3 {
                for d in 0..3 {
                    o[r][d] += f * b[r][d];
                }
            }
            o
        };
        let k1 = rhs(s, y);
        let k2 = rhs(s + 0.5 * h, &add(y, &k1, 0.5 * h));
        let k3 = rhs(s + 0.5 * h, &add(y, &k2, 0.5 * h));
        let k4 = rhs(s + h, &add(y, &k3, h));
        let mut o = *y;
        for r in 0..3 {
            for d in 0..3 {
                o[r][d] += h / 6.0 * (k1[r][d] + 2.0 * k2[r][d] + 2.0 * k3[r][d] + k4[r][d]);
            }
        }
        o
    };
    // Start at s = -ds from the frame (e1, e2, e3) placed at s = 0 by
    // integrating backwards.
    let mut y: State = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for step in 0..substeps {
        y = rk4(-(step as f64) * h, &y, -h);
    }
    let mut points = Vec::with_capacity(segments + 3);
    let mut kappa = Vec::with_capacity(segments + 3);
    for node in 0..segments + 3 {
        let s = (node as f64 - 1.0) * ds;
        let r = (y[0][0].powi(2) + y[0][1].powi(2) + y[0][2].powi(2)).sqrt();
        points.push([y[0][0] / r, y[0][1] / r, y[0][2] / r]);
        kappa.push(k(s));
        for step in 0..substeps {
            y = rk4(s + step as f64 * h, &y, h);
        }
    }
    Ok(OpenBase {
        points,
        kappa,
        ds,
        length,
    })
}
