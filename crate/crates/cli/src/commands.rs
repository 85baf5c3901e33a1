use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use serde_json::json;
use viscogeo::critical::{epsilon_ratio, non_convergence, sphere_counterexample, EllipticProfile};
use viscogeo::elliptic::jacobi;
use viscogeo::flow::{perturbed_equator, relax};
use viscogeo::hopf::{
    area_energy, elliptic_profile_base, hopf_torus, horizontal_lift, horizontal_lift_open,
    torus_curvatures, willmore_residual, willmore_sigma, HopfTorusGrid,
};
use viscogeo::index::{hessian, morse_index};
use viscogeo::minmax::{
    canonical_sweepout, entropy_schedule, geometric_schedule, quasi_conservation, width,
};
use viscogeo::{io, DiscreteClosedCurve, EllipticModulus, EnergyParams, ManifoldModel};

use crate::config::{
    CounterexampleConfig, EllipticConfig, HopfBase, HopfConfig, IndexConfig, MinmaxConfig,
    RelaxConfig,
};

/// Output directory; every file is written whole.
pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn new(dir: &Path) -> anyhow::Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
        })
    }

    fn write(&self, name: &str, text: &str) -> anyhow::Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }

    fn csv<R: AsRef<[String]>>(
        &self,
        name: &str,
        header: &[&str],
        rows: &[R],
    ) -> anyhow::Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r.as_ref())?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
        self.write(name, &String::from_utf8(bytes)?)
    }
}

fn f(x: f64) -> String {
    format!("{x:e}")
}

pub fn elliptic(cfg: &EllipticConfig, out: &Output) -> anyhow::Result<()> {
    let table = cfg
        .p
        .iter()
        .map(|&p| {
            let m = EllipticModulus::new(p)?;
            Ok(vec![f(p), f(m.k()), f(m.e())])
        })
        .collect::<viscogeo::Result<Vec<_>>>()?;
    out.csv("elliptic.csv", &["p", "K", "E"], &table)?;

    let mut dn = Vec::new();
    for &p in &cfg.dn_p {
        let period = 2.0 * EllipticModulus::new(p)?.k();
        for i in 0..cfg.dn_samples {
            let t = 2.0 * period * i as f64 / (cfg.dn_samples - 1) as f64;
            let (sn, cn, d) = jacobi(t, p)?;
            dn.push(vec![f(p), f(t), f(sn), f(cn), f(d)]);
        }
    }
    out.csv("dn.csv", &["p", "t", "sn", "cn", "dn"], &dn)?;

    let mut profiles = Vec::new();
    let mut worst_residual: f64 = 0.0;
    for &p in &cfg.profile_p {
        let eps = epsilon_ratio(p)?;
        for &sigma in &cfg.profile_sigma {
            for &k in &cfg.profile_curvature {
                let prof = EllipticProfile::new(p, sigma, k, cfg.profile_m)?;
                let l = prof.period_length();
                for i in 0..=16 {
                    let t = l * i as f64 / 16.0;
                    worst_residual = worst_residual.max(prof.ode_residual(t, 1e-4).abs());
                }
                profiles.push(vec![
                    f(p),
                    f(sigma),
                    f(k),
                    cfg.profile_m.to_string(),
                    f(l),
                    f(prof.bending_integral()),
                    f(prof.energy()),
                    f(eps),
                ]);
            }
        }
    }
    out.csv(
        "profiles.csv",
        &[
            "p",
            "sigma",
            "K_M",
            "m",
            "L",
            "bending",
            "energy",
            "eps_ratio",
        ],
        &profiles,
    )?;

    out.json(
        "summary.json",
        &json!({
            "command": "elliptic",
            "p_count": cfg.p.len(),
            "dn_rows": dn.len(),
            "profiles": profiles.len(),
            "max_ode_residual": worst_residual,
            "K_at_zero": EllipticModulus::new(0.0)?.k(),
        }),
    )
}

pub fn relax_cmd(cfg: &RelaxConfig, seed: u64, out: &Output) -> anyhow::Result<()> {
    let start = perturbed_equator(cfg.nodes, cfg.amplitude, seed, cfg.antipodal)?;
    let e = EnergyParams::new(cfg.sigma)?;
    let (curve, report) = relax(&start, &e, &cfg.flow)?;
    out.write("curve.csv", &io::curve_to_csv(&curve)?)?;
    let history: Vec<_> = report
        .history
        .iter()
        .enumerate()
        .map(|(i, &v)| vec![i.to_string(), f(v)])
        .collect();
    out.csv("history.csv", &["iter", "energy"], &history)?;
    out.json("report.json", &report)?;
    out.json(
        "summary.json",
        &json!({
            "command": "relax",
            "seed": seed,
            "nodes": cfg.nodes,
            "sigma": cfg.sigma,
            "initial_length": start.length(),
            "iters": report.iters,
            "energy": report.energy,
            "grad_norm": report.grad_norm,
            "length": report.length,
            "converged": report.converged,
            "frozen": report.frozen,
        }),
    )
}

pub fn minmax(cfg: &MinmaxConfig, out: &Output) -> anyhow::Result<()> {
    let sw = canonical_sweepout(&ManifoldModel::unit_sphere(), cfg.slices, cfg.nodes)?;
    let e = EnergyParams::new(cfg.sigma)?;
    let w = width(&sw, &e, &cfg.flow, cfg.continuity_bound)?;
    let slices: Vec<_> = w
        .relaxed
        .slices
        .iter()
        .zip(&w.relaxed.params)
        .enumerate()
        .map(|(i, (s, &t))| {
            vec![
                i.to_string(),
                f(t),
                f(s.length()),
                f(s.energy(&e)),
                s.is_degenerate().to_string(),
            ]
        })
        .collect();
    out.csv(
        "width.csv",
        &["slice", "t", "length", "energy", "degenerate"],
        &slices,
    )?;

    let sigmas = geometric_schedule(cfg.schedule_start, cfg.schedule_ratio, cfg.schedule_count);
    let schedule = entropy_schedule(&sw, &sigmas, &cfg.flow, cfg.continuity_bound)?;
    out.write("entropy.csv", &schedule.to_csv()?)?;
    out.json(
        "summary.json",
        &json!({
            "command": "minmax",
            "slices": cfg.slices,
            "nodes": cfg.nodes,
            "sigma": cfg.sigma,
            "beta": w.beta,
            "argmax": w.argmax,
            "floor": w.floor,
            "schedule": schedule.entries,
            "accepted": schedule.accepted().count(),
        }),
    )
}

pub fn counterexample(cfg: &CounterexampleConfig, out: &Output) -> anyhow::Result<()> {
    let (curve, forms) = sphere_counterexample(cfg.n, cfg.nodes)?;
    let q = quasi_conservation(&curve, &EnergyParams::new(forms.sigma)?)?;
    out.write("curve.csv", &io::curve_to_csv(&curve)?)?;

    let nc = non_convergence(
        &cfg.sequence,
        cfg.nodes_per_turn,
        (cfg.interval[0], cfg.interval[1]),
    )?;
    let rows: Vec<_> = nc
        .entries
        .iter()
        .map(|e| {
            vec![
                e.n.to_string(),
                f(e.sigma),
                f(e.interval_length),
                f(e.ratio),
                f(e.distance_to_limit),
            ]
        })
        .collect();
    out.csv(
        "nonconvergence.csv",
        &[
            "n",
            "sigma",
            "interval_length",
            "ratio",
            "distance_to_limit",
        ],
        &rows,
    )?;

    out.json(
        "summary.json",
        &json!({
            "command": "counterexample",
            "n": forms.n,
            "nodes": cfg.nodes,
            "sigma": forms.sigma,
            "kappa": forms.kappa,
            "radius": forms.radius,
            "E": forms.energy,
            "L": forms.length,
            "abs_E_minus_pi": (forms.energy - PI).abs(),
            "abs_L_minus_half_pi": (forms.length - 0.5 * PI).abs(),
            "discrete_energy": forms.discrete_energy,
            "discrete_length": forms.discrete_length,
            "discrete_bending": forms.discrete_bending,
            "geometric_length": forms.geometric_length,
            "relative_energy_gap": (forms.discrete_energy - forms.energy).abs() / forms.energy,
            "quasi_conservation": q,
            "non_convergence": {
                "interval": nc.interval,
                "liminf_ratio": nc.liminf_ratio,
                "limit_ratio": nc.limit_ratio,
            },
        }),
    )
}

pub fn index(cfg: &IndexConfig, out: &Output) -> anyhow::Result<()> {
    let zero = EnergyParams::new(0.0)?;
    let mut curves: Vec<(String, usize, DiscreteClosedCurve)> = Vec::new();
    for &n in &cfg.nodes {
        for &k in &cfg.covers {
            curves.push((
                format!("equator_x{k}"),
                n,
                DiscreteClosedCurve::equator_cover(k, n)?,
            ));
        }
        if cfg.torus {
            let torus = ManifoldModel::flat_torus(vec![1.0, 1.0]);
            let g = DiscreteClosedCurve::from_fn(torus, n, |th| vec![th / TAU, 0.5])?;
            curves.push(("torus".into(), n, g));
        }
    }
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for (label, n, c) in &curves {
        let r = morse_index(&hessian(c, &zero)?, cfg.eig_tol)?;
        let spectrum: Vec<_> = r
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(i, &v)| vec![i.to_string(), f(v)])
            .collect();
        out.csv(
            &format!("spectrum_{label}_{n}.csv"),
            &["idx", "eigenvalue"],
            &spectrum,
        )?;
        rows.push(vec![
            label.clone(),
            n.to_string(),
            r.index.to_string(),
            r.zero_modes.to_string(),
            f(r.tol),
        ]);
        reports.push(json!({
            "curve": label,
            "nodes": n,
            "index": r.index,
            "zero_modes": r.zero_modes,
            "index_with_zero_modes": r.index_with_zero_modes,
            "tol": r.tol,
        }));
    }
    out.csv(
        "index.csv",
        &["curve", "nodes", "index", "zero_modes", "tol"],
        &rows,
    )?;
    let stable = curves.iter().zip(&rows).all(|((label, _, _), row)| {
        rows.iter()
            .filter(|r| &r[0] == label)
            .all(|r| r[2] == row[2])
    });
    out.json(
        "summary.json",
        &json!({ "command": "index", "curves": reports, "stable_across_nodes": stable }),
    )
}

fn grid_json(g: &HopfTorusGrid) -> serde_json::Value {
    let rows: Vec<_> = (0..g.rows())
        .map(|i| {
            (0..g.n_theta)
                .map(|j| g.point(i, j).to_vec())
                .collect::<Vec<_>>()
        })
        .collect();
    json!({
        "rows": g.rows(),
        "n_theta": g.n_theta,
        "closed": g.lifted.closed,
        "times": g.lifted.times,
        "points": rows,
    })
}

pub fn hopf(cfg: &HopfConfig, out: &Output) -> anyhow::Result<()> {
    let sigma = cfg.sigma;
    let sp = 2.0 * sigma / (1.0 + 2.0 * sigma * sigma).sqrt();
    let (grid, kappa, energy, energy_sp) = match cfg.base {
        HopfBase::Equator | HopfBase::Latitude => {
            let c = if cfg.base == HopfBase::Equator {
                DiscreteClosedCurve::equator(cfg.rows)?
            } else {
                DiscreteClosedCurve::latitude(cfg.height, cfg.rows)?
            };
            let kappa = c.geodesic_curvature()?;
            let grid = hopf_torus(&horizontal_lift(&c, None)?, cfg.n_theta)?;
            let energy = c.energy(&EnergyParams::new(sigma)?);
            let energy_sp = c.energy(&EnergyParams::new(sp)?);
            (grid, kappa, energy, energy_sp)
        }
        HopfBase::Profile => {
            let prof = EllipticProfile::new(cfg.p, sigma, 1.0, 1)?;
            let base = elliptic_profile_base(&prof, cfg.rows)?;
            let grid = hopf_torus(&horizontal_lift_open(&base.points, None)?, cfg.n_theta)?;
            let energy_sp = prof.period_length() + (sp / sigma).powi(2) * prof.bending_integral();
            (grid, base.kappa, prof.energy(), energy_sp)
        }
    };
    let curv = torus_curvatures(&grid, &kappa)?;
    let w = willmore_sigma(&grid, sigma)?;
    let area = area_energy(&grid, sigma, &kappa)?;
    let residual = willmore_residual(&grid, sigma)?;
    out.write("torus.csv", &grid.to_csv()?)?;
    out.json("torus.json", &grid_json(&grid))?;
    out.json(
        "summary.json",
        &json!({
            "command": "hopf",
            "base": format!("{:?}", cfg.base).to_lowercase(),
            "rows": grid.rows(),
            "n_theta": grid.n_theta,
            "sigma": sigma,
            "sigma_prime": sp,
            "holonomy": grid.lifted.holonomy,
            "projection_defect": grid.lifted.projection_defect,
            "grid": grid.report(),
            "mean_curvature_error": curv.mean_error,
            "gauss_error": curv.gauss_error,
            "willmore": w,
            "base_energy": energy,
            "willmore_ratio": w / energy,
            "area_energy": area,
            "area_prediction": (1.0 + 2.0 * sigma * sigma) * PI * energy_sp,
            "willmore_residual": residual,
        }),
    )
}
