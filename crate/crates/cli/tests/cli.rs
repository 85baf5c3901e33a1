use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, config: Option<&str>, args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_viscogeo"));
    cmd.arg("--out").arg(dir.join("out"));
    if let Some(text) = config {
        let path = dir.join("config.toml");
        std::fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.args(args).output().unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join("out").join(name)).unwrap()
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&read(dir, "summary.json")).unwrap()
}

fn assert_success(o: &Output) {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn elliptic_table_has_header_and_k_at_zero() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), None, &["elliptic"]);
    assert_success(&o);
    let text = read(dir.path(), "elliptic.csv");
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p,K,E"));
    let first: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(first[0], 0.0);
    assert!((first[1] - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    assert!((first[2] - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    let profiles = read(dir.path(), "profiles.csv");
    assert!(profiles.starts_with("p,sigma,K_M,m,L,bending,energy,eps_ratio\n"));
    assert!(summary(dir.path())["max_ode_residual"].as_f64().unwrap() < 1e-5);
}

#[test]
fn modulus_out_of_range_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let o = run(
        dir.path(),
        Some("[elliptic]\np = [0.0, 0.5, 1.2]\n"),
        &["elliptic"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("modulus"));
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), Some("[relax]\nnodez = 64\n"), &["relax"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_config_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), Some("[relax\nnodes = 64\n"), &["relax"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn zero_threads_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), None, &["--threads", "0", "elliptic"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn module_failure_exits_with_structured_message() {
    // Adjacent latitudes are about pi/16 apart, far above the bound.
    let dir = TempDir::new().unwrap();
    let config = "[minmax]\nslices = 17\nnodes = 32\ncontinuity_bound = 0.01\n";
    let o = run(dir.path(), Some(config), &["minmax"]);
    assert_eq!(o.status.code(), Some(3));
    let msg: serde_json::Value = serde_json::from_slice(o.stderr.trim_ascii()).unwrap();
    assert_eq!(msg["error"], "continuity");
    assert!(msg["message"].as_str().unwrap().contains("exceeds bound"));
}

#[test]
fn counterexample_summary_has_closed_forms() {
    let dir = TempDir::new().unwrap();
    let config = "[counterexample]\nn = 10\nnodes = 1024\nsequence = [5, 10]\n";
    let o = run(dir.path(), Some(config), &["counterexample"]);
    assert_success(&o);
    let s = summary(dir.path());
    let sigma: f64 = 1.0 / 40.0;
    let l = std::f64::consts::TAU * sigma * 10.0 / (1.0 - 2.0 * sigma * sigma).sqrt();
    let e = 2.0 * l * (1.0 - sigma * sigma);
    assert!((s["L"].as_f64().unwrap() - l).abs() < 1e-12);
    assert!((s["E"].as_f64().unwrap() - e).abs() < 1e-12);
    assert!(
        (s["abs_E_minus_pi"].as_f64().unwrap() - (e - std::f64::consts::PI).abs()).abs() < 1e-12
    );
    assert!(read(dir.path(), "nonconvergence.csv")
        .starts_with("n,sigma,interval_length,ratio,distance_to_limit\n"));
}

#[test]
fn minmax_schedule_selects_some_sigma() {
    let dir = TempDir::new().unwrap();
    let config = "[minmax]\nslices = 33\nnodes = 64\ncontinuity_bound = 0.5\nschedule_count = 4\n[minmax.flow]\nmax_iters = 40\n";
    let o = run(dir.path(), Some(config), &["--threads", "2", "minmax"]);
    assert_success(&o);
    let text = read(dir.path(), "entropy.csv");
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let col = r
        .headers()
        .unwrap()
        .iter()
        .position(|h| h == "selected")
        .unwrap();
    let selected: Vec<String> = r.records().map(|x| x.unwrap()[col].to_string()).collect();
    assert_eq!(selected.len(), 4);
    assert!(selected.iter().any(|s| s == "true"));
}

#[test]
fn rerun_with_same_seed_is_byte_identical() {
    let config = "[relax]\nnodes = 64\n[relax.flow]\nmax_iters = 200\n";
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    assert_success(&run(a.path(), Some(config), &["--seed", "7", "relax"]));
    assert_success(&run(
        b.path(),
        Some(config),
        &["--seed", "7", "--threads", "3", "relax"],
    ));
    for name in ["curve.csv", "history.csv", "summary.json"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
    let c = TempDir::new().unwrap();
    assert_success(&run(c.path(), Some(config), &["--seed", "8", "relax"]));
    assert_ne!(read(a.path(), "curve.csv"), read(c.path(), "curve.csv"));
}

#[test]
fn index_reports_equator_covers() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), Some("[index]\nnodes = [64]\n"), &["index"]);
    assert_success(&o);
    let text = read(dir.path(), "index.csv");
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let found: Vec<(String, usize)> = r
        .records()
        .map(|x| {
            let x = x.unwrap();
            (x[0].to_string(), x[2].parse().unwrap())
        })
        .collect();
    let expect = [
        ("equator_x1", 1),
        ("equator_x2", 3),
        ("equator_x3", 5),
        ("torus", 0),
    ];
    for (label, idx) in expect {
        assert!(
            found.contains(&(label.to_string(), idx)),
            "{label}: {found:?}"
        );
    }
    assert!(read(dir.path(), "spectrum_torus_64.csv").starts_with("idx,eigenvalue\n"));
}

#[test]
fn hopf_exports_grid() {
    let dir = TempDir::new().unwrap();
    let o = run(
        dir.path(),
        Some("[hopf]\nrows = 128\nn_theta = 16\n"),
        &["hopf"],
    );
    assert_success(&o);
    let csv = read(dir.path(), "torus.csv");
    assert!(csv.starts_with("i,j,x1,x2,x3,x4\n"));
    assert_eq!(csv.lines().count(), 1 + 128 * 16);
    let s = summary(dir.path());
    let ratio = s["willmore_ratio"].as_f64().unwrap();
    assert!((ratio - std::f64::consts::PI).abs() < 1e-2, "{ratio}");
    let grid: serde_json::Value = serde_json::from_str(&read(dir.path(), "torus.json")).unwrap();
    assert_eq!(grid["points"].as_array().unwrap().len(), 128);
}
