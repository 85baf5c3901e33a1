//! Sweepouts of the sphere, their relaxed width, the entropy rule that picks
//! viscosity values, and diagnostics for the conserved field along nearly
//! critical curves.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{DiscreteClosedCurve, EnergyParams};
use crate::error::{Error, Result};
use crate::flow::{relax, FlowOptions, FlowReport};
use crate::linalg::{dot, norm};
use crate::manifold::ManifoldModel;
use crate::spectral;

/// Default bound on the node-wise distance between adjacent slices.
pub const DEFAULT_CONTINUITY_BOUND: f64 = 0.2;

/// One member of a sweepout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Slice {
    /// A constant curve at the given point.
    Point(Vec<f64>),
    Curve(DiscreteClosedCurve),
}

impl Slice {
    pub fn is_degenerate(&self) -> bool {
        matches!(self, Slice::Point(_))
    }

    pub fn curve(&self) -> Option<&DiscreteClosedCurve> {
        match self {
            Slice::Curve(c) => Some(c),
            Slice::Point(_) => None,
        }
    }

    pub fn energy(&self, e: &EnergyParams) -> f64 {
        self.curve().map_or(0.0, |c| c.energy(e))
    }

    pub fn length(&self) -> f64 {
        self.curve().map_or(0.0, DiscreteClosedCurve::length)
    }
}

/// A one-parameter family of closed curves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sweepout {
    pub manifold: ManifoldModel,
    pub params: Vec<f64>,
    pub slices: Vec<Slice>,
}

impl Sweepout {
    /// Largest node-wise geodesic distance between slices `i` and `i + 1`,
    /// or `None` when either is degenerate.
    pub fn adjacent_distance(&self, i: usize) -> Result<Option<f64>> {
        match (&self.slices[i], &self.slices[i + 1]) {
            (Slice::Curve(a), Slice::Curve(b)) => a.max_node_distance(b).map(Some),
            _ => Ok(None),
        }
    }

    /// Checks the continuity bound between adjacent non-degenerate slices.
    ///
    /// Pairs involving a point slice are not compared: a circle with `N`
    /// nodes next to a pole is never within a small node-wise distance at
    /// practical slice counts, and the collapse to a point is continuous in
    /// the limit regardless.
    pub fn check_continuity(&self, bound: f64) -> Result<()> {
        for i in 0..self.slices.len().saturating_sub(1) {
            if let Some(d) = self.adjacent_distance(i)? {
                if d > bound {
                    return Err(Error::Continuity {
                        first: i,
                        second: i + 1,
                        distance: d,
                        bound,
                    });
                }
            }
        }
        Ok(())
    }

    /// Index and value of the largest slice energy.
    pub fn max_energy(&self, e: &EnergyParams) -> (usize, f64) {
        self.slices.iter().map(|s| s.energy(e)).enumerate().fold(
            (0, f64::NEG_INFINITY),
            |best, (i, v)| if v > best.1 { (i, v) } else { best },
        )
    }

    pub fn max_length(&self) -> f64 {
        self.slices.iter().map(Slice::length).fold(0.0, f64::max)
    }
}

/// Latitude sweepout `x_3 = 1 - 2t` of the unit 2-sphere on `slices`
/// uniformly spaced parameters, with the poles as degenerate end slices.
pub fn canonical_sweepout(m: &ManifoldModel, slices: usize, nodes: usize) -> Result<Sweepout> {
    if *m != ManifoldModel::unit_sphere() {
        return Err(Error::Unsupported(
            "the canonical sweepout is defined on the unit 2-sphere".into(),
        ));
    }
    if slices < 3 {
        return Err(Error::InvalidInput(
            "a sweepout needs at least 3 slices".into(),
        ));
    }
    let params: Vec<f64> = (0..slices)
        .map(|k| k as f64 / (slices - 1) as f64)
        .collect();
    let slices = params
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let h = 1.0 - 2.0 * t;
            if k == 0 {
                Ok(Slice::Point(vec![0.0, 0.0, 1.0]))
            } else if k == slices - 1 {
                Ok(Slice::Point(vec![0.0, 0.0, -1.0]))
            } else {
                DiscreteClosedCurve::latitude(h, nodes).map(Slice::Curve)
            }
        })
        .collect::<Result<_>>()?;
    Ok(Sweepout {
        manifold: m.clone(),
        params,
        slices,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WidthResult {
    pub beta: f64,
    pub argmax: usize,
    /// Length floor used by the cutoff (half the largest unrelaxed length).
    pub floor: f64,
    pub relaxed: Sweepout,
    /// Flow report per slice (`None` for degenerate slices).
    pub reports: Vec<Option<FlowReport>>,
}

/// Relaxes every non-degenerate slice and returns the largest energy.
///
/// The flow uses the length floor `max length / 2` unless the options set
/// one, and caps each node displacement per iteration at a quarter of the
/// continuity bound. The relaxed family must still satisfy the bound.
pub fn width(
    sw: &Sweepout,
    e: &EnergyParams,
    o: &FlowOptions,
    continuity_bound: f64,
) -> Result<WidthResult> {
    sw.check_continuity(continuity_bound)?;
    let floor = if o.length_floor > 0.0 {
        o.length_floor
    } else {
        0.5 * sw.max_length()
    };
    let cap = 0.25 * continuity_bound;
    let opts = FlowOptions {
        length_floor: floor,
        max_displacement: Some(o.max_displacement.map_or(cap, |d| d.min(cap))),
        ..o.clone()
    };
    let relaxed: Vec<(Slice, Option<FlowReport>)> = sw
        .slices
        .par_iter()
        .map(|s| match s {
            Slice::Point(p) => Ok((Slice::Point(p.clone()), None)),
            Slice::Curve(c) => {
                let (r, rep) = relax(c, e, &opts)?;
                Ok((Slice::Curve(r), Some(rep)))
            }
        })
        .collect::<Result<_>>()?;
    let (slices, reports): (Vec<_>, Vec<_>) = relaxed.into_iter().unzip();
    let relaxed = Sweepout {
        manifold: sw.manifold.clone(),
        params: sw.params.clone(),
        slices,
    };
    relaxed.check_continuity(continuity_bound)?;
    let (argmax, beta) = relaxed.max_energy(e);
    Ok(WidthResult {
        beta,
        argmax,
        floor,
        relaxed,
        reports,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyEntry {
    pub sigma: f64,
    pub beta: f64,
    pub beta_prime: f64,
    /// `1 / (sigma log(1/sigma))`.
    pub bound: f64,
    /// Bending of the slice realizing the width.
    pub bending: f64,
    /// `beta_prime <= bound`.
    pub selected: bool,
    /// `bending <= 1 / log(1/sigma)`.
    pub bending_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyScheduleReport {
    pub entries: Vec<EntropyEntry>,
}

impl EntropyScheduleReport {
    /// Entries that pass the slope test and the bending bound.
    pub fn accepted(&self) -> impl Iterator<Item = &EntropyEntry> {
        self.entries.iter().filter(|e| e.selected && e.bending_ok)
    }

    /// CSV with header `sigma,beta,beta_prime,bound,bending,selected`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "sigma",
            "beta",
            "beta_prime",
            "bound",
            "bending",
            "selected",
        ])?;
        for e in &self.entries {
            w.write_record([
                format!("{:e}", e.sigma),
                format!("{:e}", e.beta),
                format!("{:e}", e.beta_prime),
                format!("{:e}", e.bound),
                format!("{:e}", e.bending),
                e.selected.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// `sigma_k = start · ratio^k` for `k < count`.
pub fn geometric_schedule(start: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| start * ratio.powi(k as i32)).collect()
}

/// Width at each viscosity value and the entropy selection rule.
///
/// Slopes are backward differences toward the next smaller value; the last
/// entry reuses the slope of the final pair.
pub fn entropy_schedule(
    sw: &Sweepout,
    sigmas: &[f64],
    o: &FlowOptions,
    continuity_bound: f64,
) -> Result<EntropyScheduleReport> {
    if sigmas.len() < 2 {
        return Err(Error::InvalidInput("need at least two sigma values".into()));
    }
    let limit = (-1.0f64).exp();
    for w in sigmas.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::InvalidInput(
                "sigma values must strictly decrease".into(),
            ));
        }
    }
    if sigmas.iter().any(|&s| !(s > 0.0 && s < limit)) {
        return Err(Error::InvalidInput(
            "sigma values must lie in (0, 1/e)".into(),
        ));
    }
    let mut widths = Vec::with_capacity(sigmas.len());
    for &s in sigmas {
        let e = EnergyParams::new(s)?;
        let w = width(sw, &e, o, continuity_bound)?;
        let bending = w.relaxed.slices[w.argmax]
            .curve()
            .map_or(0.0, |c| c.bending(&e));
        widths.push((w.beta, bending));
    }
    let n = sigmas.len();
    let entries = (0..n)
        .map(|i| {
            let (a, b) = if i + 1 < n { (i, i + 1) } else { (i - 1, i) };
            let slope = (widths[a].0 - widths[b].0) / (sigmas[a] - sigmas[b]);
            let s = sigmas[i];
            let log = (1.0 / s).ln();
            let bound = 1.0 / (s * log);
            let bending = widths[i].1;
            EntropyEntry {
                sigma: s,
                beta: widths[i].0,
                beta_prime: slope,
                bound,
                bending,
                selected: slope <= bound,
                bending_ok: bending <= 1.0 / log,
            }
        })
        .collect();
    Ok(EntropyScheduleReport { entries })
}

/// Diagnostics of the field `v = u' - sigma² (2 D_t² u' + 3 kappa² u')`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiConservation {
    /// `(∫ |D_t v|² ds)^(1/2)`.
    pub dtv_l2: f64,
    /// `max_i |v_i - mean(v)|`.
    pub oscillation: f64,
    /// `max_i |<u'_i, v_i> - (1 - sigma² kappa_i²)|`.
    pub defect: f64,
    /// `sigma² ∫ kappa² ds` from the same derivatives.
    pub bending: f64,
    /// `2 |R|_inf sigma sqrt(bending)`.
    pub bound: f64,
    /// Mean node spacing.
    pub h: f64,
}

/// Fraction of the Fourier modes retained when differentiating.
const SPECTRAL_KEEP: f64 = 2.0 / 3.0;

/// Evaluates the conserved-field diagnostics along `c`.
///
/// Derivatives are taken spectrally in the node index (the curve is closed
/// and smooth), converted to arclength by the local speed and projected to
/// the tangent space, so `D_t V = P(V_theta) / |X_theta|`. The nested third
/// and fourth derivatives would lose the leading digits to truncation error
/// with low-order stencils.
pub fn quasi_conservation(c: &DiscreteClosedCurve, e: &EnergyParams) -> Result<QuasiConservation> {
    let n = c.len();
    if n < 16 {
        return Err(Error::InvalidInput(format!(
            "{n} nodes is too few for the diagnostics (need 16)"
        )));
    }
    c.edge_lengths()?;
    let q = c.dim();
    let m = c.manifold();
    let period = std::f64::consts::TAU;
    let dtheta = period / n as f64;
    let (points, closing) = c.unwrapped();
    // Remove the winding drift on the torus so that coordinates are periodic.
    let coords: Vec<Vec<f64>> = (0..q)
        .map(|d| {
            (0..n)
                .map(|i| points[i][d] - closing[d] * i as f64 / n as f64)
                .collect()
        })
        .collect();
    let diff = |field: &[Vec<f64>]| -> Vec<Vec<f64>> {
        field
            .iter()
            .map(|comp| spectral::derivative(comp, period, SPECTRAL_KEEP))
            .collect()
    };
    let mut xt = diff(&coords);
    for (d, comp) in xt.iter_mut().enumerate() {
        for v in comp.iter_mut() {
            *v += closing[d] / period;
        }
    }
    let node = |field: &[Vec<f64>], i: usize| -> Vec<f64> { field.iter().map(|c| c[i]).collect() };
    let mut speed = vec![0.0; n];
    let mut tangent = vec![vec![0.0; n]; q];
    for i in 0..n {
        let mut t = node(&xt, i);
        m.project_tangent_in_place(c.node(i), &mut t);
        let s = norm(&t);
        if s == 0.0 {
            return Err(Error::Degenerate(format!("zero speed at node {i}")));
        }
        speed[i] = s;
        for d in 0..q {
            tangent[d][i] = t[d] / s;
        }
    }
    let covariant = |field: &[Vec<f64>]| -> Vec<Vec<f64>> {
        let mut out = diff(field);
        for i in 0..n {
            let mut v = node(&out, i);
            m.project_tangent_in_place(c.node(i), &mut v);
            for d in 0..q {
                out[d][i] = v[d] / speed[i];
            }
        }
        out
    };
    let accel = covariant(&tangent);
    let jerk = covariant(&accel);
    let s2 = e.sigma2();
    let mut v = vec![vec![0.0; n]; q];
    let mut kappa2 = vec![0.0; n];
    for i in 0..n {
        let a = node(&accel, i);
        kappa2[i] = dot(&a, &a);
        for d in 0..q {
            v[d][i] = tangent[d][i] - s2 * (2.0 * jerk[d][i] + 3.0 * kappa2[i] * tangent[d][i]);
        }
    }
    let dv = covariant(&v);
    let mut dtv2 = 0.0;
    let mut bending = 0.0;
    let mut defect: f64 = 0.0;
    let mut mean = vec![0.0; q];
    for i in 0..n {
        let w = speed[i] * dtheta;
        let g = node(&dv, i);
        dtv2 += dot(&g, &g) * w;
        bending += kappa2[i] * w;
        let vi = node(&v, i);
        let ti = node(&tangent, i);
        defect = defect.max((dot(&ti, &vi) - (1.0 - s2 * kappa2[i])).abs());
        for d in 0..q {
            mean[d] += vi[d] / n as f64;
        }
    }
    bending *= s2;
    let oscillation = (0..n)
        .map(|i| {
            let diff: Vec<f64> = (0..q).map(|d| v[d][i] - mean[d]).collect();
            norm(&diff)
        })
        .fold(0.0, f64::max);
    let r_sup = m.sectional_curvature().abs();
    Ok(QuasiConservation {
        dtv_l2: dtv2.sqrt(),
        oscillation,
        defect,
        bending,
        bound: 2.0 * r_sup * e.sigma * bending.sqrt(),
        h: c.length() / n as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_sweepout_shape() {
        let sw = canonical_sweepout(&ManifoldModel::unit_sphere(), 9, 128).unwrap();
        assert!(sw.slices[0].is_degenerate());
        assert!(sw.slices[8].is_degenerate());
        let eq = sw.slices[4].curve().unwrap();
        assert!((eq.length() - std::f64::consts::TAU).abs() < 1e-3);
        assert!(canonical_sweepout(&ManifoldModel::unit_sphere(), 2, 128).is_err());
        let torus = ManifoldModel::flat_torus(vec![1.0, 1.0]);
        assert!(matches!(
            canonical_sweepout(&torus, 9, 128),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn continuity_violation_is_reported() {
        let sw = canonical_sweepout(&ManifoldModel::unit_sphere(), 5, 64).unwrap();
        match sw.check_continuity(0.2) {
            Err(Error::Continuity { first, second, .. }) => assert_eq!(second, first + 1),
            other => panic!("expected a continuity error, got {other:?}"),
        }
        assert!(sw.check_continuity(1.0).is_ok());
    }

    #[test]
    fn schedule_input_checks() {
        let sw = canonical_sweepout(&ManifoldModel::unit_sphere(), 9, 64).unwrap();
        let o = FlowOptions::default();
        assert!(entropy_schedule(&sw, &[0.1], &o, 1.0).is_err());
        assert!(entropy_schedule(&sw, &[0.1, 0.2], &o, 1.0).is_err());
        assert!(entropy_schedule(&sw, &[0.5, 0.2], &o, 1.0).is_err());
    }

    #[test]
    fn geometric_schedule_values() {
        let s = geometric_schedule(0.2, 0.5, 4);
        assert_eq!(s, vec![0.2, 0.1, 0.05, 0.025]);
    }

    #[test]
    fn conserved_field_on_the_equator() {
        let c = DiscreteClosedCurve::equator(128).unwrap();
        let q = quasi_conservation(&c, &EnergyParams::new(0.3).unwrap()).unwrap();
        assert!(q.dtv_l2 < 1e-10);
        assert!(q.defect < 1e-10);
        assert!(q.bending < 1e-20);
    }
}
