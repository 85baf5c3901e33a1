use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

mod commands;
mod config;

use commands::Output;
use config::{ConfigError, ExperimentConfig};

#[derive(Parser)]
#[command(author, version, about = "Viscosity min-max experiments for closed geodesics", long_about = None)]
struct Args {
    /// TOML experiment configuration; defaults apply to missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (created if missing).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Random seed; overrides the config value.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for slice relaxations.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Tables of K(p), E(p), Jacobi functions and critical profiles.
    Elliptic,
    /// Relax a perturbed equator under the regularized energy.
    Relax,
    /// Width of the latitude sweepout and the entropy schedule.
    Minmax,
    /// The small-circle family on the sphere and its diagnostics.
    Counterexample,
    /// Morse indices of equator covers and a torus geodesic.
    Index,
    /// Hopf torus over a base curve and its Willmore quantities.
    Hopf,
}

fn run(args: &Args) -> anyhow::Result<()> {
    let cfg = ExperimentConfig::load(args.config.as_deref())?;
    cfg.validate()?;
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(ConfigError("--threads must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let dir = args
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let out = Output::new(&dir)?;
    match args.command {
        Command::Elliptic => commands::elliptic(&cfg.elliptic, &out),
        Command::Relax => commands::relax_cmd(&cfg.relax, seed, &out),
        Command::Minmax => commands::minmax(&cfg.minmax, &out),
        Command::Counterexample => commands::counterexample(&cfg.counterexample, &out),
        Command::Index => commands::index(&cfg.index, &out),
        Command::Hopf => commands::hopf(&cfg.hopf, &out),
    }
}

fn error_kind(e: &viscogeo::Error) -> &'static str {
    use viscogeo::Error::*;
    match e {
        Domain(_) => "domain",
        InvalidInput(_) => "invalid_input",
        Degenerate(_) => "degenerate",
        Unsupported(_) => "unsupported",
        Flow { .. } => "flow",
        Continuity { .. } => "continuity",
        Numerical(_) => "numerical",
        Parse(_) => "parse",
        Io(_) => "io",
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let Err(err) = run(&args) else {
        return ExitCode::SUCCESS;
    };
    if let Some(c) = err.downcast_ref::<ConfigError>() {
        eprintln!("config error: {c}");
        return ExitCode::from(2);
    }
    if let Some(e) = err.downcast_ref::<viscogeo::Error>() {
        eprintln!(
            "{}",
            json!({ "error": error_kind(e), "message": e.to_string() })
        );
        return ExitCode::from(3);
    }
    eprintln!("error: {err:#}");
    ExitCode::FAILURE
}
