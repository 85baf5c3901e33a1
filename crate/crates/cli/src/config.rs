use std::path::Path;

use serde::Deserialize;
use viscogeo::flow::FlowOptions;

/// Invalid or unreadable configuration; mapped to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Experiment parameters. Every section is optional and falls back to its
/// defaults; unknown keys are rejected.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub elliptic: EllipticConfig,
    pub relax: RelaxConfig,
    pub minmax: MinmaxConfig,
    pub counterexample: CounterexampleConfig,
    pub index: IndexConfig,
    pub hopf: HopfConfig,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EllipticConfig {
    /// Moduli for the `p,K,E` table.
    pub p: Vec<f64>,
    /// Moduli whose `sn, cn, dn` are sampled over two periods of `dn`.
    pub dn_p: Vec<f64>,
    pub dn_samples: usize,
    /// Critical profiles: every combination of the three lists.
    pub profile_p: Vec<f64>,
    pub profile_sigma: Vec<f64>,
    pub profile_curvature: Vec<f64>,
    pub profile_m: u32,
}

impl Default for EllipticConfig {
    fn default() -> Self {
        Self {
            p: (0..100).map(|k| k as f64 / 100.0).collect(),
            dn_p: vec![0.2, 0.6, 0.9],
            dn_samples: 201,
            profile_p: vec![0.0, 0.2, 0.4, 0.6, 0.8, 0.9, 0.95, 0.98],
            profile_sigma: vec![0.05, 0.1, 0.2],
            profile_curvature: vec![-1.0, 0.0, 1.0],
            profile_m: 1,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelaxConfig {
    pub nodes: usize,
    /// Height noise added to the equator.
    pub amplitude: f64,
    /// Mirror the noise through the origin so the curve stays balanced.
    pub antipodal: bool,
    pub sigma: f64,
    pub flow: FlowOptions,
}

impl Default for RelaxConfig {
    fn default() -> Self {
        Self {
            nodes: 256,
            amplitude: 1e-2,
            antipodal: true,
            sigma: 0.0,
            flow: FlowOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinmaxConfig {
    pub slices: usize,
    pub nodes: usize,
    pub continuity_bound: f64,
    /// Viscosity for the single width computation.
    pub sigma: f64,
    /// Geometric schedule `start · ratio^k`, `k < count`.
    pub schedule_start: f64,
    pub schedule_ratio: f64,
    pub schedule_count: usize,
    pub flow: FlowOptions,
}

impl Default for MinmaxConfig {
    fn default() -> Self {
        Self {
            slices: 33,
            nodes: 128,
            continuity_bound: 0.2,
            sigma: 0.0,
            schedule_start: 0.2,
            schedule_ratio: 0.5,
            schedule_count: 4,
            flow: FlowOptions {
                max_iters: 300,
                ..FlowOptions::default()
            },
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CounterexampleConfig {
    pub n: u32,
    pub nodes: usize,
    /// Turn counts for the sub-interval length table.
    pub sequence: Vec<u32>,
    pub nodes_per_turn: usize,
    pub interval: [f64; 2],
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        Self {
            n: 10,
            nodes: 4096,
            sequence: vec![5, 10, 20, 40],
            nodes_per_turn: 128,
            interval: [0.5, 2.0],
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IndexConfig {
    pub nodes: Vec<usize>,
    /// Covers of the equator to analyse.
    pub covers: Vec<usize>,
    /// Also analyse a closed geodesic of the unit square torus.
    pub torus: bool,
    /// Absolute eigenvalue threshold; relative to the spectrum when absent.
    pub eig_tol: Option<f64>,
}

impl Default for IndexConfig {
    fn default() -> Self {
        Self {
            nodes: vec![128, 256],
            covers: vec![1, 2, 3],
            torus: true,
            eig_tol: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HopfBase {
    Equator,
    Latitude,
    Profile,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HopfConfig {
    pub base: HopfBase,
    /// Base nodes (closed curves) or arc segments (profiles).
    pub rows: usize,
    pub n_theta: usize,
    pub sigma: f64,
    /// Height of the latitude base.
    pub height: f64,
    /// Modulus of the profile base.
    pub p: f64,
}

impl Default for HopfConfig {
    fn default() -> Self {
        Self {
            base: HopfBase::Equator,
            rows: 512,
            n_theta: 32,
            sigma: 0.1,
            height: 0.5,
            p: 0.6,
        }
    }
}

fn check(ok: bool, msg: impl Into<String>) -> anyhow::Result<()> {
    if ok {
        Ok(())
    } else {
        Err(invalid(msg))
    }
}

fn modulus(p: f64, key: &str) -> anyhow::Result<()> {
    check(
        (0.0..1.0).contains(&p),
        format!("{key}: modulus {p} must lie in [0, 1)"),
    )
}

fn flow(o: &FlowOptions, key: &str) -> anyhow::Result<()> {
    o.validate().map_err(|e| invalid(format!("{key}: {e}")))
}

impl ExperimentConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        toml::from_str(text).map_err(|e| invalid(format!("bad config: {e}")))
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let e = &self.elliptic;
        check(!e.p.is_empty(), "elliptic.p must not be empty")?;
        for &p in e.p.iter().chain(&e.dn_p).chain(&e.profile_p) {
            modulus(p, "elliptic")?;
        }
        check(e.dn_samples >= 2, "elliptic.dn_samples must be at least 2")?;
        check(e.profile_m >= 1, "elliptic.profile_m must be positive")?;
        for &s in &e.profile_sigma {
            check(
                s > 0.0 && s.is_finite(),
                format!("elliptic.profile_sigma: {s} must be positive"),
            )?;
        }
        for &k in &e.profile_curvature {
            check(k.is_finite(), "elliptic.profile_curvature must be finite")?;
            for &s in &e.profile_sigma {
                check(
                    1.0 - 2.0 * s * s * k > 0.0,
                    format!(
                        "elliptic: profile sigma {s} with curvature {k} needs 1 - 2 sigma^2 K > 0"
                    ),
                )?;
            }
        }

        let r = &self.relax;
        check(r.nodes >= 8, "relax.nodes must be at least 8")?;
        check(
            !r.antipodal || r.nodes % 2 == 0,
            "relax.nodes must be even for antipodal noise",
        )?;
        check(
            r.amplitude >= 0.0 && r.amplitude.is_finite(),
            "relax.amplitude must be >= 0",
        )?;
        check(
            r.sigma >= 0.0 && r.sigma.is_finite(),
            "relax.sigma must be >= 0",
        )?;
        flow(&r.flow, "relax.flow")?;

        let m = &self.minmax;
        check(m.slices >= 3, "minmax.slices must be at least 3")?;
        check(m.nodes >= 8, "minmax.nodes must be at least 8")?;
        check(
            m.continuity_bound > 0.0,
            "minmax.continuity_bound must be positive",
        )?;
        check(
            m.sigma >= 0.0 && m.sigma.is_finite(),
            "minmax.sigma must be >= 0",
        )?;
        check(
            m.schedule_count >= 2,
            "minmax.schedule_count must be at least 2",
        )?;
        check(
            m.schedule_ratio > 0.0 && m.schedule_ratio < 1.0,
            "minmax.schedule_ratio must lie in (0, 1)",
        )?;
        check(
            m.schedule_start > 0.0 && m.schedule_start < (-1.0f64).exp(),
            "minmax.schedule_start must lie in (0, 1/e)",
        )?;
        flow(&m.flow, "minmax.flow")?;

        let c = &self.counterexample;
        check(c.n >= 1, "counterexample.n must be positive")?;
        check(
            c.nodes >= 64 * c.n as usize,
            format!(
                "counterexample.nodes must be at least {}",
                64 * c.n as usize
            ),
        )?;
        check(
            c.sequence.iter().all(|&n| n >= 1),
            "counterexample.sequence must be positive",
        )?;
        let [a, b] = c.interval;
        check(
            0.0 <= a && a < b && b <= std::f64::consts::TAU,
            "counterexample.interval must satisfy 0 <= a < b <= 2 pi",
        )?;

        let i = &self.index;
        check(
            i.nodes.iter().all(|&n| n >= 8),
            "index.nodes must be at least 8",
        )?;
        check(
            i.covers.iter().all(|&k| k >= 1),
            "index.covers must be positive",
        )?;
        if let Some(t) = i.eig_tol {
            check(t > 0.0, "index.eig_tol must be positive")?;
        }

        let h = &self.hopf;
        check(h.rows >= 16, "hopf.rows must be at least 16")?;
        check(h.n_theta >= 8, "hopf.n_theta must be at least 8")?;
        check(
            h.sigma >= 0.0 && h.sigma.is_finite(),
            "hopf.sigma must be >= 0",
        )?;
        check(h.height.abs() < 1.0, "hopf.height must lie in (-1, 1)")?;
        modulus(h.p, "hopf.p")?;
        if h.base == HopfBase::Profile {
            check(
                h.sigma > 0.0,
                "hopf.sigma must be positive for a profile base",
            )?;
            check(
                1.0 - 2.0 * h.sigma * h.sigma > 0.0,
                "hopf.sigma must satisfy 2 sigma^2 < 1",
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn empty_file_gives_defaults() {
        let c = ExperimentConfig::parse("").unwrap();
        assert_eq!(c.minmax.schedule_count, 4);
        assert_eq!(c.elliptic.p.len(), 100);
    }

    #[test]
    fn nested_flow_options_parse() {
        let c = ExperimentConfig::parse("[relax.flow]\nmax_iters = 7\n").unwrap();
        assert_eq!(c.relax.flow.max_iters, 7);
        assert_eq!(c.relax.flow.grad_tol, FlowOptions::default().grad_tol);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for text in [
            "bogus = 1",
            "[elliptic]\nq = [0.1]",
            "[relax.flow]\nspeed = 2",
        ] {
            let err = ExperimentConfig::parse(text).unwrap_err();
            assert!(err.downcast_ref::<ConfigError>().is_some(), "{text}");
        }
    }

    #[test]
    fn out_of_range_values_are_config_errors() {
        for text in [
            "[elliptic]\np = [0.5, 1.0]",
            "[hopf]\np = -0.1",
            "[minmax]\nschedule_start = 0.5",
            "[counterexample]\nn = 10\nnodes = 100",
            "[relax]\nnodes = 9",
        ] {
            let c = ExperimentConfig::parse(text).unwrap();
            let err = c.validate().unwrap_err();
            assert!(err.downcast_ref::<ConfigError>().is_some(), "{text}");
        }
    }
}
