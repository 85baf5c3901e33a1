//! Projected gradient descent for the regularized energy, with a length
//! floor below which curves are frozen.

use serde::{Deserialize, Serialize};

use crate::curve::{DiscreteClosedCurve, EnergyParams, NodeField};
use crate::error::{Error, Result};

/// Armijo sufficient-decrease constant.
const ARMIJO: f64 = 1e-4;
/// Step growth after an accepted step.
const GROWTH: f64 = 1.5;
/// Steps below this are treated as stagnation.
const MIN_STEP: f64 = 1e-16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowOptions {
    pub max_iters: usize,
    /// Stop when the largest node gradient is below this.
    pub grad_tol: f64,
    /// Initial step; values `<= 0` select half the mean edge length.
    pub step0: f64,
    /// Step reduction factor for backtracking, in `(0, 1)`.
    pub backtrack: f64,
    /// Curves at or below this length are frozen.
    pub length_floor: f64,
    /// Width of the cutoff ramp above the floor; `None` means `floor / 2`.
    pub cutoff_scale: Option<f64>,
    /// Resample to equal spacing every this many iterations (0 = never).
    pub resample_every: usize,
    /// Optional cap on any node's displacement in one iteration.
    pub max_displacement: Option<f64>,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            grad_tol: 1e-6,
            step0: 0.0,
            backtrack: 0.5,
            length_floor: 0.0,
            cutoff_scale: None,
            resample_every: 0,
            max_displacement: None,
        }
    }
}

impl FlowOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) {
            return Err(Error::InvalidInput("grad_tol must be positive".into()));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::InvalidInput(
                "backtrack factor must lie in (0, 1)".into(),
            ));
        }
        if !(self.length_floor >= 0.0 && self.length_floor.is_finite()) {
            return Err(Error::InvalidInput(
                "length_floor must be finite and >= 0".into(),
            ));
        }
        if !self.step0.is_finite() {
            return Err(Error::InvalidInput("step0 must be finite".into()));
        }
        if let Some(s) = self.cutoff_scale {
            if !(s > 0.0) {
                return Err(Error::InvalidInput("cutoff_scale must be positive".into()));
            }
        }
        if let Some(d) = self.max_displacement {
            if !(d > 0.0) {
                return Err(Error::InvalidInput(
                    "max_displacement must be positive".into(),
                ));
            }
        }
        Ok(())
    }

    /// Step multiplier for a curve of the given length: a smooth cubic ramp
    /// from 0 at the floor to 1 at `floor + scale`.
    pub fn cutoff(&self, length: f64) -> f64 {
        if self.length_floor <= 0.0 {
            return 1.0;
        }
        let scale = self.cutoff_scale.unwrap_or(0.5 * self.length_floor);
        let x = ((length - self.length_floor) / scale).clamp(0.0, 1.0);
        x * x * (3.0 - 2.0 * x)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowReport {
    pub iters: usize,
    pub energy: f64,
    pub grad_norm: f64,
    pub length: f64,
    /// Energy before the first and after every accepted step.
    pub history: Vec<f64>,
    /// Indices into `history` right after which the curve was resampled.
    pub resampled_at: Vec<usize>,
    pub converged: bool,
    /// The cutoff vanished and the curve was left in place.
    pub frozen: bool,
}

/// Moves every node by `-step · grad` and retracts onto the manifold.
fn displaced(c: &DiscreteClosedCurve, grad: &NodeField, step: f64) -> Result<DiscreteClosedCurve> {
    let q = c.dim();
    let m = c.manifold();
    let mut nodes = Vec::with_capacity(c.flat_nodes().len());
    for i in 0..c.len() {
        let x = c.node(i);
        let g = grad.get(i);
        let moved: Vec<f64> = (0..q).map(|a| x[a] - step * g[a]).collect();
        nodes.extend(m.project_point(&moved)?);
    }
    c.with_flat_nodes(nodes)
}

/// One explicit projected descent step of size `step`.
pub fn flow_step(
    c: &DiscreteClosedCurve,
    e: &EnergyParams,
    step: f64,
) -> Result<DiscreteClosedCurve> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidInput(format!("step {step} must be positive")));
    }
    let grad = c.first_variation(e);
    if grad.max_norm() == 0.0 {
        return Ok(c.clone());
    }
    displaced(c, &grad, step)
}

/// Relaxes `c` toward a critical point of the energy.
pub fn relax(
    c: &DiscreteClosedCurve,
    e: &EnergyParams,
    o: &FlowOptions,
) -> Result<(DiscreteClosedCurve, FlowReport)> {
    o.validate()?;
    let n = c.len();
    let mut curve = c.clone();
    let mut energy = curve.energy(e);
    let mut grad = curve.first_variation(e);
    let mut step = if o.step0 > 0.0 {
        o.step0
    } else {
        0.5 * curve.length() / n as f64
    };
    let mut report = FlowReport {
        iters: 0,
        energy,
        grad_norm: grad.max_norm(),
        length: curve.length(),
        history: vec![energy],
        resampled_at: Vec::new(),
        converged: false,
        frozen: false,
    };

    for iter in 0..o.max_iters {
        let gnorm = grad.max_norm();
        if gnorm < o.grad_tol {
            report.converged = true;
            break;
        }
        let psi = o.cutoff(curve.length());
        if psi == 0.0 {
            report.frozen = true;
            break;
        }
        let g2 = grad.dot(&grad);
        let mut accepted = None;
        while step >= MIN_STEP {
            let mut eff = step * psi;
            if let Some(cap) = o.max_displacement {
                eff = eff.min(cap / gnorm);
            }
            let trial = displaced(&curve, &grad, eff).map_err(|err| Error::Flow {
                iteration: iter,
                reason: err.to_string(),
            })?;
            let te = trial.energy(e);
            if !te.is_finite() {
                return Err(Error::Flow {
                    iteration: iter,
                    reason: "energy became non-finite".into(),
                });
            }
            if te <= energy - ARMIJO * eff * g2 {
                accepted = Some((trial, te));
                break;
            }
            step *= o.backtrack;
        }
        let Some((next, te)) = accepted else {
            // No decrease at any representable step: rounding floor reached.
            break;
        };
        curve = next;
        energy = te;
        step *= GROWTH;
        report.iters = iter + 1;
        report.history.push(energy);

        if o.resample_every > 0 && (iter + 1) % o.resample_every == 0 {
            curve = curve.resample_arclength(n).map_err(|err| Error::Flow {
                iteration: iter,
                reason: err.to_string(),
            })?;
            energy = curve.energy(e);
            report.resampled_at.push(report.history.len() - 1);
        }
        grad = curve.first_variation(e);
    }

    report.energy = energy;
    report.grad_norm = grad.max_norm();
    report.length = curve.length();
    if report.grad_norm < o.grad_tol {
        report.converged = true;
    }
    Ok((curve, report))
}

/// Equator of `S^2` with seeded normal noise of the given amplitude,
/// re-projected to the sphere.
///
/// With `antipodal` set, node `i + n/2` receives the opposite height of node
/// `i`. This removes the average height mode, the single unstable direction
/// of the equator, so descent can settle on a great circle instead of
/// sliding off toward a pole.
pub fn perturbed_equator(
    n: usize,
    amplitude: f64,
    seed: u64,
    antipodal: bool,
) -> Result<DiscreteClosedCurve> {
    use rand::{Rng, SeedableRng};
    if antipodal && n % 2 != 0 {
        return Err(Error::InvalidInput(
            "antipodal noise needs an even node count".into(),
        ));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut heights = vec![0.0; n];
    let free = if antipodal { n / 2 } else { n };
    for h in heights.iter_mut().take(free) {
        *h = amplitude * rng.random_range(-1.0..1.0);
    }
    if antipodal {
        for i in 0..n / 2 {
            heights[i + n / 2] = -heights[i];
        }
    }
    let pts = (0..n)
        .map(|i| {
            let th = std::f64::consts::TAU * i as f64 / n as f64;
            vec![th.cos(), th.sin(), heights[i]]
        })
        .collect();
    DiscreteClosedCurve::from_points_projected(crate::ManifoldModel::unit_sphere(), pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_ramp() {
        let o = FlowOptions {
            length_floor: 2.0,
            ..FlowOptions::default()
        };
        assert_eq!(o.cutoff(1.0), 0.0);
        assert_eq!(o.cutoff(2.0), 0.0);
        assert_eq!(o.cutoff(3.0), 1.0);
        assert!((o.cutoff(2.5) - 0.5).abs() < 1e-15);
        assert_eq!(FlowOptions::default().cutoff(0.1), 1.0);
    }

    #[test]
    fn invalid_options_rejected() {
        let bad = FlowOptions {
            backtrack: 1.0,
            ..FlowOptions::default()
        };
        let c = DiscreteClosedCurve::equator(16).unwrap();
        assert!(relax(&c, &EnergyParams::new(0.0).unwrap(), &bad).is_err());
        assert!(flow_step(&c, &EnergyParams::new(0.0).unwrap(), 0.0).is_err());
    }

    #[test]
    fn critical_input_is_returned_immediately() {
        let c = DiscreteClosedCurve::equator(64).unwrap();
        let e = EnergyParams::new(0.1).unwrap();
        let (out, rep) = relax(&c, &e, &FlowOptions::default()).unwrap();
        assert_eq!(rep.iters, 0);
        assert!(rep.converged);
        assert_eq!(out, c);
    }

    #[test]
    fn frozen_below_floor() {
        let c = DiscreteClosedCurve::latitude(0.4, 64).unwrap();
        let o = FlowOptions {
            length_floor: 10.0,
            ..FlowOptions::default()
        };
        let (out, rep) = relax(&c, &EnergyParams::new(0.0).unwrap(), &o).unwrap();
        assert!(rep.frozen);
        assert_eq!(out, c);
    }

    #[test]
    fn antipodal_noise_is_symmetric() {
        let c = perturbed_equator(32, 1e-2, 7, true).unwrap();
        for i in 0..16 {
            assert!((c.node(i)[2] + c.node(i + 16)[2]).abs() < 1e-15);
        }
        assert!(perturbed_equator(31, 1e-2, 7, true).is_err());
    }
}
