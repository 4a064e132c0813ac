//! Reproducible experiment runner.
//!
//! Four subcommands cover the shipped experiment families:
//!
//! * `sweep` — λ-sweeps of empirical vs analytic IAC and MSD,
//! * `drift-check` — Monte Carlo decay curves of the Lyapunov function,
//! * `variant-bias` — stationary bias of the jump-process variants,
//! * `sample` — raw chain dumps (`t, q_1..q_D, p_1..p_D`).
//!
//! Every run is configured by a flat `key=value` file, overridable by
//! command-line flags of the same names, and writes deterministic CSV:
//! identical configuration and seed give byte-identical files. Exit codes
//! are `0` on success, `2` for configuration problems, `3` for runtime or
//! numerical failures.

pub mod config;
pub mod csv;
pub mod run;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
pub use config::{ExperimentConfig, RawConfig, SamplerKind, Scenario};

#[derive(Debug, Parser)]
#[command(
    name = "rhmc",
    about = "Randomized Hamiltonian Monte Carlo benchmark runner",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by all subcommands; every flag overrides the config-file
/// key of the same name.
#[derive(Debug, Args, Default, Clone)]
pub struct CommonArgs {
    /// Flat key=value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Scenario: gaussian1d, gaussian10d, doublewell2d or custom.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Sampler: hmc, hmc-metropolis, rhmc, variant1 or variant2.
    #[arg(long)]
    pub sampler: Option<String>,
    /// Comma-separated durations, e.g. "0.5,1,2,4".
    #[arg(long)]
    pub lambda_grid: Option<String>,
    /// Partial-refreshment angle in (0, pi/2]; default pi/2.
    #[arg(long)]
    pub horowitz_angle: Option<String>,
    /// Integrator step length; default 1e-3.
    #[arg(long)]
    pub step_length: Option<String>,
    /// Samples (or jump events) per chain.
    #[arg(long)]
    pub n_samples: Option<String>,
    /// Master seed for the random streams.
    #[arg(long)]
    pub seed: Option<String>,
    /// Output CSV path.
    #[arg(long)]
    pub output_path: Option<String>,
    /// Component standard deviations for the custom scenario.
    #[arg(long)]
    pub sigmas: Option<String>,
}

#[derive(Debug, Args, Default, Clone)]
pub struct DriftArgs {
    /// Start position, comma-separated.
    #[arg(long)]
    pub initial_position: Option<String>,
    /// Start momentum, comma-separated (default: zeros).
    #[arg(long)]
    pub initial_momentum: Option<String>,
    /// Curve horizon in time units (default 20).
    #[arg(long)]
    pub horizon: Option<String>,
    /// Independent replicas averaged per grid point (default 1000).
    #[arg(long)]
    pub replicas: Option<String>,
}

#[derive(Debug, Args, Default, Clone)]
pub struct BiasArgs {
    /// Comma-separated step lengths (default "0.2,0.1,0.05").
    #[arg(long)]
    pub h_grid: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a duration sweep and tabulate IAC/MSD versus closed forms.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Record the Monte Carlo mean of the Lyapunov function over time.
    DriftCheck {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        drift: DriftArgs,
    },
    /// Measure the stationary bias of the jump-process variants.
    VariantBias {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        bias: BiasArgs,
    },
    /// Dump a raw chain (t, q_1..q_D, p_1..p_D).
    Sample {
        #[command(flatten)]
        common: CommonArgs,
    },
}

impl CommonArgs {
    fn overrides(&self) -> RawConfig {
        RawConfig {
            scenario: self.scenario.clone(),
            sampler: self.sampler.clone(),
            lambda_grid: self.lambda_grid.clone(),
            horowitz_angle: self.horowitz_angle.clone(),
            step_length: self.step_length.clone(),
            n_samples: self.n_samples.clone(),
            seed: self.seed.clone(),
            output_path: self.output_path.clone(),
            sigmas: self.sigmas.clone(),
            ..RawConfig::default()
        }
    }
}

fn load(common: &CommonArgs, extra: RawConfig) -> Result<ExperimentConfig, Error> {
    let base = match &common.config {
        Some(path) => RawConfig::from_file(path)?,
        None => RawConfig::default(),
    };
    let merged = base.merge(common.overrides()).merge(extra);
    ExperimentConfig::from_raw(&merged)
}

/// Executes a parsed command line.
pub fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Sweep { common } => run::run_sweep(&load(&common, RawConfig::default())?),
        Command::DriftCheck { common, drift } => {
            let extra = RawConfig {
                initial_position: drift.initial_position.clone(),
                initial_momentum: drift.initial_momentum.clone(),
                horizon: drift.horizon.clone(),
                replicas: drift.replicas.clone(),
                ..RawConfig::default()
            };
            run::run_drift_check(&load(&common, extra)?)
        }
        Command::VariantBias { common, bias } => {
            let extra = RawConfig { h_grid: bias.h_grid.clone(), ..RawConfig::default() };
            run::run_variant_bias(&load(&common, extra)?)
        }
        Command::Sample { common } => run::run_sample(&load(&common, RawConfig::default())?),
    }
}

/// Exit code for a failed run: `2` for configuration problems, `3` for
/// runtime and numerical failures.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidConfig(_) => 2,
        _ => 3,
    }
}
