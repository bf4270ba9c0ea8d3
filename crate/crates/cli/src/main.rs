mod commands;
mod config;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigError, RunConfig};

#[derive(Parser)]
#[command(name = "dschro", version, about = "Discrete Clifford operator solver for the 3D Schrodinger equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the invariant suites.
    Verify(Flags),
    /// Refinement ladder of the discrete fundamental solution.
    Fundsol(Flags),
    /// Solve the nonlinear problem on one grid.
    Solve(Flags),
    /// Error tables for a manufactured example.
    Example(Flags),
    /// Operator norms and contraction bounds per grid.
    Study(Flags),
}

#[derive(Args, Clone, Default)]
struct Flags {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    example: Option<String>,
    /// Grid list, e.g. "8:85,12:190".
    #[arg(long)]
    grids: Option<String>,
    #[arg(long)]
    bc: Option<String>,
    #[arg(long)]
    nl: Option<String>,
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Right-hand side field file for `solve`.
    #[arg(long)]
    rhs: Option<PathBuf>,
    /// Comma-separated suites for `verify`.
    #[arg(long)]
    only: Option<String>,
    #[arg(long)]
    ratio: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    strict_mesh: bool,
    /// Exit nonzero when a solve does not converge.
    #[arg(long)]
    strict: bool,
    /// Use the long grid list instead of the desk grids.
    #[arg(long)]
    long_run: bool,
    /// Extra key=value overrides.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

pub enum Failure {
    Config(String),
    Run(String),
}

impl From<dschro::Error> for Failure {
    fn from(e: dschro::Error) -> Self {
        use dschro::Error::*;
        match e {
            InvalidGrid(_) | InvalidArgument(_) | MeshRatio { .. } => Failure::Config(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

fn build_config(name: &str, flags: &Flags) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::defaults(name);
    if let Some(path) = &flags.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        cfg.apply_file(&text)?;
    }
    let pairs = [
        ("example", flags.example.clone()),
        ("grids", flags.grids.clone()),
        ("bc", flags.bc.clone()),
        ("nl", flags.nl.clone()),
        ("strategy", flags.strategy.clone()),
        ("out", flags.out.as_ref().map(|p| p.display().to_string())),
        ("rhs", flags.rhs.as_ref().map(|p| p.display().to_string())),
        ("only", flags.only.clone()),
        ("ratio", flags.ratio.clone()),
        ("workers", flags.workers.map(|w| w.to_string())),
    ];
    for (k, v) in pairs {
        if let Some(v) = v {
            cfg.set(k, &v)?;
        }
    }
    for kv in &flags.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| Failure::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v)?;
    }
    cfg.strict_mesh |= flags.strict_mesh;
    cfg.strict |= flags.strict;
    cfg.long_run |= flags.long_run;
    if cfg.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build_global()
            .map_err(|e| Failure::Run(format!("cannot size worker pool: {e}")))?;
    }
    cfg.resolve()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (name, flags) = match &cli.command {
        Command::Verify(f) => ("verify", f),
        Command::Fundsol(f) => ("fundsol", f),
        Command::Solve(f) => ("solve", f),
        Command::Example(f) => ("example", f),
        Command::Study(f) => ("study", f),
    };
    let outcome = build_config(name, flags).and_then(|cfg| match name {
        "verify" => commands::verify(&cfg),
        "fundsol" => commands::fundsol(&cfg),
        "solve" => commands::solve(&cfg),
        "example" => commands::example(&cfg),
        _ => commands::study(&cfg),
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
