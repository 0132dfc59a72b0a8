//! Experiment runner binding the model modules: config parsing, seeding,
//! replica orchestration, and plot-ready JSON/CSV output.
//!
//! Exit codes: 0 when every configured check passes, 1 when any check
//! fails, 2 on configuration errors.

mod config;
mod output;
mod runs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::ExperimentConfig;
use icgm_core::environment::Environment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "icgm", about = "Inhomogeneous corner growth laboratory")]
struct Cli {
    /// Experiment configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the configuration value.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Replica count override for Monte Carlo subcommands.
    #[arg(long, global = true)]
    replicas: Option<usize>,
    /// Worker threads for replica parallelism.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Limit-shape curve, critical directions, and linear intervals.
    Shape,
    /// Passage-time field dump and the finite geodesic to the far corner.
    Lpp,
    /// Monte Carlo verification of the boundary-model increment laws.
    Burke,
    /// Finite-horizon Busemann estimates with exact-rate oracles.
    Busemann,
    /// Busemann geodesic tracing, trapping, and direction statistics.
    Geodesic,
    /// Competition interface laws, exact and empirical.
    Cif,
    /// Particle systems: exclusion process, tandem queues, couplings.
    Particles,
    /// Swap-time vs passage-time coupling identity on a shared window.
    CoupleCheck {
        /// Window side length.
        #[arg(long, default_value_t = 20)]
        size: i64,
    },
    /// The full verification battery; aggregated report.
    VerifyAll,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("config error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    if let Some(workers) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .ok();
    }
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| anyhow::anyhow!("--config is required"))?;
    let raw = std::fs::read_to_string(config_path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", config_path.display()))?;
    // Two-phase parse: record whether the config carries an explicit seed,
    // then reject unknown keys through the typed schema.
    let value: serde_json::Value = serde_json::from_str(&raw)?;
    let config_has_seed = value
        .get("environment")
        .and_then(|e| e.get("seed"))
        .is_some();
    let mut config: ExperimentConfig = serde_json::from_str(&raw)?;

    // Seed precedence: --seed flag, then the config value, then ICGM_SEED,
    // then zero.
    let seed = cli
        .seed
        .or(if config_has_seed {
            Some(config.environment.seed)
        } else {
            None
        })
        .or_else(|| {
            std::env::var("ICGM_SEED")
                .ok()
                .and_then(|v| v.parse::<u64>().ok())
        })
        .unwrap_or(0);
    config.environment.seed = seed;
    if let Some(replicas) = cli.replicas {
        override_replicas(&mut config, replicas);
    }
    let env = Environment::from_spec(config.environment.clone())
        .map_err(|e| anyhow::anyhow!("invalid environment: {e}"))?;

    let outcome = match cli.command {
        Command::Shape => runs::run_shape(&env, &config, cli.format)?,
        Command::Lpp => runs::run_lpp(&env, &config, cli.format)?,
        Command::Burke => runs::run_burke(&env, &config, cli.format)?,
        Command::Busemann => runs::run_busemann(&env, &config, cli.format)?,
        Command::Geodesic => runs::run_geodesic(&env, &config, cli.format)?,
        Command::Cif => runs::run_cif(&env, &config, cli.format)?,
        Command::Particles => runs::run_particles(&env, &config, cli.format)?,
        Command::CoupleCheck { size } => runs::run_couple_check(&env, size)?,
        Command::VerifyAll => runs::run_verify_all(&env, &config)?,
    };
    match cli.out {
        Some(path) => std::fs::write(&path, &outcome.body)
            .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))?,
        None => print!("{}", outcome.body),
    }
    Ok(outcome.all_pass)
}

fn override_replicas(config: &mut ExperimentConfig, replicas: usize) {
    if let Some(s) = config.burke.as_mut() {
        s.replicas = replicas;
    }
    if let Some(s) = config.busemann.as_mut() {
        s.replicas = replicas;
    }
    if let Some(s) = config.cif.as_mut() {
        s.replicas = replicas;
    }
    if let Some(s) = config.particles.as_mut() {
        s.replicas = replicas;
    }
    if let Some(s) = config.geodesic.as_mut() {
        s.replicas = replicas;
    }
    if let Some(s) = config.verify.as_mut() {
        s.replicas = replicas;
    }
}
