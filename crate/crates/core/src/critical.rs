//! Explicit critical points of the regularized energy on surfaces of
//! constant curvature, built from the Jacobi `dn` function, and the family of
//! small circles on the sphere whose lengths do not converge to a geodesic.
//!
//! A unit-speed curve with geodesic curvature `k(t)` on a surface of Gauss
//! curvature `K` is critical when
//!
//! ```text
//! k = sigma² (2 k'' + k³ + 2 K k).
//! ```
//!
//! Its solutions are `k(t) = (2C/sigma) dn(C t / sigma, p)` with
//! `C = sqrt((1 - 2 sigma² K) / (2 (2 - p²)))`.

use serde::{Deserialize, Serialize};

use crate::curve::{DiscreteClosedCurve, EnergyParams};
use crate::elliptic::EllipticModulus;
use crate::error::{Error, Result};
use crate::manifold::ManifoldModel;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticProfile {
    pub p: EllipticModulus,
    pub sigma: f64,
    /// Gauss curvature of the ambient surface.
    pub curvature: f64,
    /// Number of curvature periods along the closed curve.
    pub m: u32,
}

impl EllipticProfile {
    pub fn new(p: f64, sigma: f64, curvature: f64, m: u32) -> Result<Self> {
        let prof = Self {
            p: EllipticModulus::new(p)?,
            sigma,
            curvature,
            m,
        };
        prof.validate()?;
        Ok(prof)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Domain(format!(
                "sigma {} must be positive",
                self.sigma
            )));
        }
        if !self.curvature.is_finite() {
            return Err(Error::Domain("surface curvature must be finite".into()));
        }
        if self.m == 0 {
            return Err(Error::Domain("period count must be positive".into()));
        }
        if !(1.0 - 2.0 * self.sigma * self.sigma * self.curvature > 0.0) {
            return Err(Error::Domain(format!(
                "1 - 2 sigma² K = {} must be positive",
                1.0 - 2.0 * self.sigma * self.sigma * self.curvature
            )));
        }
        Ok(())
    }

    /// The frequency constant `C`.
    pub fn amplitude(&self) -> f64 {
        amplitude(self.sigma, self.curvature, self.p.value())
    }

    /// Geodesic curvature at arclength `t`.
    pub fn curvature_profile(&self, t: f64) -> f64 {
        let c = self.amplitude();
        let (_, _, dn) = self.p.jacobi(c * t / self.sigma);
        2.0 * c / self.sigma * dn
    }

    /// Total length `2 sigma m K(p) / C` (m periods of `dn²`).
    pub fn period_length(&self) -> f64 {
        2.0 * self.sigma * self.m as f64 * self.p.k() / self.amplitude()
    }

    /// `∫_0^L sigma² k(t)² dt = 8 sigma m C E(p)`.
    pub fn bending_integral(&self) -> f64 {
        8.0 * self.sigma * self.m as f64 * self.amplitude() * self.p.e()
    }

    /// `L + bending`.
    pub fn energy(&self) -> f64 {
        self.period_length() + self.bending_integral()
    }

    /// Finite-difference residual of `k - sigma² (2k'' + k³ + 2Kk)` at `t`,
    /// with `k''` from the fourth-order five-point stencil of step `h`.
    pub fn ode_residual(&self, t: f64, h: f64) -> f64 {
        let k = |s: f64| self.curvature_profile(s);
        let k0 = k(t);
        let kpp = (-k(t + 2.0 * h) + 16.0 * k(t + h) - 30.0 * k0 + 16.0 * k(t - h)
            - k(t - 2.0 * h))
            / (12.0 * h * h);
        let s2 = self.sigma * self.sigma;
        k0 - s2 * (2.0 * kpp + k0 * k0 * k0 + 2.0 * self.curvature * k0)
    }
}

fn amplitude(sigma: f64, curvature: f64, p: f64) -> f64 {
    ((1.0 - 2.0 * sigma * sigma * curvature) / (2.0 * (2.0 - p * p))).sqrt()
}

/// Limit of `length / energy` along profiles with fixed `p` as
/// `sigma -> 0`: `(1 + 2E(p) / ((2 - p²) K(p)))^(-1)`.
pub fn epsilon_ratio(p: f64) -> Result<f64> {
    let m = EllipticModulus::new(p)?;
    Ok(1.0 / (1.0 + 2.0 * m.e() / ((2.0 - p * p) * m.k())))
}

/// The `dn` profiles for curvatures `k_plus` (lower) and `k_minus`
/// (upper) evaluated at `t`.
pub fn comparison_bounds(
    sigma: f64,
    k_plus: f64,
    k_minus: f64,
    p: f64,
    t: f64,
) -> Result<(f64, f64)> {
    if !(k_minus <= k_plus) {
        return Err(Error::Domain(format!(
            "lower curvature {k_minus} exceeds upper curvature {k_plus}"
        )));
    }
    let lower = EllipticProfile::new(p, sigma, k_plus, 1)?;
    let upper = EllipticProfile::new(p, sigma, k_minus, 1)?;
    Ok((lower.curvature_profile(t), upper.curvature_profile(t)))
}

/// Closed-form values for the small-circle family on the unit sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleForms {
    pub n: u32,
    pub sigma: f64,
    /// Geodesic curvature `sqrt(1 - 2 sigma²) / sigma`.
    pub kappa: f64,
    /// Euclidean radius of the circle, `1 / sqrt(1 + kappa²)`.
    pub radius: f64,
    /// Height of the circle's plane.
    pub height: f64,
    /// `2 pi sigma n / sqrt(1 - 2 sigma²)`.
    pub length: f64,
    /// `2 L (1 - sigma²)`.
    pub energy: f64,
    /// `2 pi n radius`, the length of the geometric circle.
    pub geometric_length: f64,
    pub discrete_length: f64,
    pub discrete_energy: f64,
    pub discrete_bending: f64,
}

/// The `n`-fold small circle with `sigma = 1/(4n)` whose constant geodesic
/// curvature solves the critical-point equation, sampled with `nodes` nodes.
pub fn sphere_counterexample(
    n: u32,
    nodes: usize,
) -> Result<(DiscreteClosedCurve, CounterexampleForms)> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    if nodes < 64 * n as usize {
        return Err(Error::InvalidInput(format!(
            "{nodes} nodes is too few for {n} turns (need {})",
            64 * n
        )));
    }
    let sigma = 1.0 / (4.0 * n as f64);
    let s2 = sigma * sigma;
    let kappa = (1.0 - 2.0 * s2).sqrt() / sigma;
    let radius = 1.0 / (1.0 + kappa * kappa).sqrt();
    let height = kappa * radius;
    let turns = n as f64;
    let curve = DiscreteClosedCurve::from_fn(ManifoldModel::unit_sphere(), nodes, |th| {
        let a = turns * th;
        vec![radius * a.cos(), radius * a.sin(), height]
    })?;
    let length = std::f64::consts::TAU * sigma * turns / (1.0 - 2.0 * s2).sqrt();
    let e = EnergyParams::new(sigma)?;
    let (dl, db) = curve.energy_parts(&e);
    let forms = CounterexampleForms {
        n,
        sigma,
        kappa,
        radius,
        height,
        length,
        energy: 2.0 * length * (1.0 - s2),
        geometric_length: std::f64::consts::TAU * turns * radius,
        discrete_length: dl,
        discrete_energy: dl + db,
        discrete_bending: db,
    };
    Ok((curve, forms))
}

/// Length of a curve restricted to a parameter interval, when the curve is
/// parametrized over `[0, 2 pi)` at constant speed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonConvergenceEntry {
    pub n: u32,
    pub sigma: f64,
    pub interval_length: f64,
    /// Length of the restriction divided by the interval's measure.
    pub ratio: f64,
    /// Largest geodesic distance from the curve to the north pole.
    pub distance_to_limit: f64,
}

/// Sub-interval lengths of the small-circle family and of its limit, the
/// north pole (a constant curve with zero length on every interval).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonConvergenceReport {
    pub interval: (f64, f64),
    pub entries: Vec<NonConvergenceEntry>,
    pub liminf_ratio: f64,
    pub limit_ratio: f64,
}

pub fn non_convergence(
    ns: &[u32],
    nodes_per_turn: usize,
    interval: (f64, f64),
) -> Result<NonConvergenceReport> {
    let (a, b) = interval;
    if !(0.0 <= a && a < b && b <= std::f64::consts::TAU) {
        return Err(Error::InvalidInput(
            "interval must satisfy 0 <= a < b <= 2 pi".into(),
        ));
    }
    let pole = [0.0, 0.0, 1.0];
    let entries = ns
        .iter()
        .map(|&n| {
            let nodes = nodes_per_turn.max(64) * n as usize;
            let (curve, forms) = sphere_counterexample(n, nodes)?;
            let edges = curve.edge_lengths()?;
            let dtheta = std::f64::consts::TAU / nodes as f64;
            // Edge i spans parameters [i dtheta, (i+1) dtheta]; count the
            // overlap with the interval.
            let mut restricted = 0.0;
            for (i, l) in edges.iter().enumerate() {
                let lo = i as f64 * dtheta;
                let hi = lo + dtheta;
                let overlap = (hi.min(b) - lo.max(a)).max(0.0);
                restricted += l * overlap / dtheta;
            }
            let distance_to_limit = (0..curve.len())
                .map(|i| curve.manifold().geodesic_distance(curve.node(i), &pole))
                .fold(0.0, f64::max);
            Ok(NonConvergenceEntry {
                n,
                sigma: forms.sigma,
                interval_length: restricted,
                ratio: restricted / (b - a),
                distance_to_limit,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let liminf_ratio = entries
        .iter()
        .map(|e| e.ratio)
        .fold(f64::INFINITY, f64::min);
    Ok(NonConvergenceReport {
        interval,
        entries,
        liminf_ratio,
        limit_ratio: 0.0,
    })
}
