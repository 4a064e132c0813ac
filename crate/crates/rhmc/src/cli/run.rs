//! Experiment runners behind the CLI subcommands.

use rayon::prelude::*;

use crate::analysis::{
    drift_verify, iac_estimate, iac_hmc_formula, iac_rhmc_formula, msd_estimate,
    msd_hmc_formula, msd_rhmc_formula,
};
use crate::cli::config::{ExperimentConfig, SamplerKind, Scenario, DOUBLE_WELL_BURN_IN};
use crate::cli::csv;
use crate::dynamics::{ExactGaussianFlow, VerletFlow};
use crate::error::Error;
use crate::model::{DiagonalGaussianTarget, DoubleWell2D, PhaseState, SamplerConfig};
use crate::samplers::{
    hmc_chain, hmc_metropolis_chain, rhmc_chain, stationary_gaussian_state, time_average,
    variant1_chain, variant2_chain, ChainOutput, RandomSource,
};

/// Observable tracked on the double well: the projection `2x + y` onto
/// the axis connecting the two wells.
pub fn well_axis_observable(q: &[f64]) -> f64 {
    2.0 * q[0] + q[1]
}

/// Tolerance used to flag fixed-duration runs whose duration sits on a
/// rotation resonance of some Gaussian component (`cos(λ/σ) = ±1`), where
/// the chain is not ergodic and empirical estimates are unreliable.
fn is_resonant(lambda: f64, sigma: f64) -> bool {
    1.0 - (lambda / sigma).cos().abs() < 1e-9
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    Iac,
    Msd,
}

impl Statistic {
    fn name(&self) -> &'static str {
        match self {
            Statistic::Iac => "iac",
            Statistic::Msd => "msd",
        }
    }
}

/// One row of a sweep: the empirical statistic for a `(λ, component)`
/// pair next to its closed form when one exists. `component_index` is
/// `-1` for aggregate statistics (MSD, and observables that are not a
/// single coordinate).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub scenario: &'static str,
    pub sampler: &'static str,
    pub lambda: f64,
    pub component_index: i64,
    pub statistic: Statistic,
    pub empirical: Option<f64>,
    pub analytic: Option<f64>,
    pub n_samples: usize,
    pub seed: u64,
    pub window: Option<usize>,
    pub resonant: bool,
}

pub const SWEEP_HEADER: [&str; 11] = [
    "scenario",
    "sampler",
    "lambda",
    "component_index",
    "statistic",
    "empirical",
    "analytic",
    "n_samples",
    "seed",
    "window",
    "flag",
];

impl SweepRecord {
    fn to_row(&self) -> Vec<String> {
        vec![
            self.scenario.to_string(),
            self.sampler.to_string(),
            csv::format_real(self.lambda),
            self.component_index.to_string(),
            self.statistic.name().to_string(),
            self.empirical.map(csv::format_real).unwrap_or_default(),
            self.analytic.map(csv::format_real).unwrap_or_default(),
            self.n_samples.to_string(),
            self.seed.to_string(),
            self.window.map(|w| w.to_string()).unwrap_or_default(),
            if self.resonant { "resonant".to_string() } else { String::new() },
        ]
    }
}

fn reject_variants_in_sweep(config: &ExperimentConfig) -> Result<(), Error> {
    if config.sampler.is_variant() {
        return Err(Error::invalid(format!(
            "sampler {} is a jump process; use the variant-bias or sample subcommands",
            config.sampler.name()
        )));
    }
    Ok(())
}

/// Runs the chain one grid point asks for and returns its samples.
///
/// Gaussian scenarios start from an exact stationary draw and use the
/// closed-form flow (the Metropolis sampler integrates with Verlet at the
/// configured step). The double well starts in the `(2, 1)` well with a
/// fresh momentum, runs Verlet, and discards a burn-in prefix.
fn scenario_chain(
    config: &ExperimentConfig,
    lambda: f64,
    rng: &mut RandomSource,
) -> Result<ChainOutput, Error> {
    let sampler_cfg =
        SamplerConfig::new(lambda, config.horowitz_angle, config.step_length, config.seed)?;
    match config.scenario {
        Scenario::DoubleWell2d => {
            let target = DoubleWell2D;
            let flow = VerletFlow::new(&target, config.step_length);
            let momentum: Vec<f64> = (0..2).map(|_| rng.standard_normal()).collect();
            let z0 = PhaseState { position: vec![2.0, 1.0], momentum };
            let total = config.n_samples + DOUBLE_WELL_BURN_IN;
            let mut chain = match config.sampler {
                SamplerKind::Rhmc => {
                    rhmc_chain(&target, &flow, &sampler_cfg, total, &z0, rng)?
                }
                SamplerKind::Hmc => {
                    hmc_chain(&target, &flow, lambda, total, &z0.position, rng)?
                }
                SamplerKind::HmcMetropolis => hmc_metropolis_chain(
                    &target,
                    lambda,
                    config.step_length,
                    total,
                    &z0.position,
                    rng,
                )?,
                _ => unreachable!("variants rejected upfront"),
            };
            chain.discard_prefix(DOUBLE_WELL_BURN_IN);
            Ok(chain)
        }
        _ => {
            let target = DiagonalGaussianTarget::new(config.sigmas.clone())?;
            let flow = ExactGaussianFlow::for_target(&target);
            let z0 = stationary_gaussian_state(&target, rng);
            match config.sampler {
                SamplerKind::Rhmc => {
                    rhmc_chain(&target, &flow, &sampler_cfg, config.n_samples, &z0, rng)
                }
                SamplerKind::Hmc => {
                    hmc_chain(&target, &flow, lambda, config.n_samples, &z0.position, rng)
                }
                SamplerKind::HmcMetropolis => hmc_metropolis_chain(
                    &target,
                    lambda,
                    config.step_length,
                    config.n_samples,
                    &z0.position,
                    rng,
                ),
                _ => unreachable!("variants rejected upfront"),
            }
        }
    }
}

fn iac_columns(
    series: &[f64],
    resonant: bool,
) -> Result<(Option<f64>, Option<usize>), Error> {
    match iac_estimate(series) {
        Ok(est) => Ok((Some(est.value), Some(est.window))),
        // A resonant fixed-duration chain can freeze and produce a
        // constant series; keep the row, just leave the estimate empty.
        Err(Error::DegenerateVariance) if resonant => Ok((None, None)),
        Err(e) => Err(e),
    }
}

fn grid_point_records(
    config: &ExperimentConfig,
    lambda: f64,
    stream: u64,
) -> Result<Vec<SweepRecord>, Error> {
    let mut rng = RandomSource::new(config.seed, stream);
    let chain = scenario_chain(config, lambda, &mut rng)?;
    let scenario = config.scenario.name();
    let sampler = config.sampler.name();
    let base = SweepRecord {
        scenario,
        sampler,
        lambda,
        component_index: -1,
        statistic: Statistic::Msd,
        empirical: None,
        analytic: None,
        n_samples: config.n_samples,
        seed: config.seed,
        window: None,
        resonant: false,
    };

    let mut records = Vec::new();
    match config.scenario {
        Scenario::DoubleWell2d => {
            let series = chain.observable(|q, _| well_axis_observable(q));
            let (empirical, window) = iac_columns(&series, false)?;
            records.push(SweepRecord {
                statistic: Statistic::Iac,
                empirical,
                window,
                ..base.clone()
            });
            records.push(SweepRecord {
                empirical: Some(msd_estimate(chain.positions_flat(), chain.dim())?),
                ..base
            });
        }
        _ => {
            let any_resonant = config.sampler == SamplerKind::Hmc
                && config.sigmas.iter().any(|s| is_resonant(lambda, *s));
            for (k, sigma) in config.sigmas.iter().enumerate() {
                let resonant =
                    config.sampler == SamplerKind::Hmc && is_resonant(lambda, *sigma);
                let analytic = match config.sampler {
                    SamplerKind::Rhmc => Some(iac_rhmc_formula(*sigma, lambda)),
                    SamplerKind::Hmc => Some(iac_hmc_formula(*sigma, lambda)),
                    _ => None,
                };
                let (empirical, window) = iac_columns(&chain.component(k), resonant)?;
                records.push(SweepRecord {
                    component_index: k as i64,
                    statistic: Statistic::Iac,
                    empirical,
                    analytic,
                    window,
                    resonant,
                    ..base.clone()
                });
            }
            let analytic_msd = match config.sampler {
                SamplerKind::Rhmc => Some(msd_rhmc_formula(&config.sigmas, lambda)),
                SamplerKind::Hmc => Some(msd_hmc_formula(&config.sigmas, lambda)),
                _ => None,
            };
            records.push(SweepRecord {
                empirical: Some(msd_estimate(chain.positions_flat(), chain.dim())?),
                analytic: analytic_msd,
                resonant: any_resonant,
                ..base
            });
        }
    }
    Ok(records)
}

/// Computes every sweep record. Grid points run on a worker pool with
/// stream indices fixed by grid position, so the result is independent of
/// scheduling; rows come back sorted by `(λ, component, statistic)`.
pub fn sweep_records(config: &ExperimentConfig) -> Result<Vec<SweepRecord>, Error> {
    reject_variants_in_sweep(config)?;
    let mut records = config
        .lambda_grid
        .par_iter()
        .enumerate()
        .map(|(g, &lambda)| grid_point_records(config, lambda, g as u64))
        .collect::<Result<Vec<_>, Error>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
    records.sort_by(|a, b| {
        a.lambda
            .total_cmp(&b.lambda)
            .then(a.component_index.cmp(&b.component_index))
            .then(a.statistic.name().cmp(b.statistic.name()))
    });
    Ok(records)
}

/// `sweep` subcommand: λ-sweep of empirical vs analytic IAC and MSD.
pub fn run_sweep(config: &ExperimentConfig) -> Result<(), Error> {
    let records = sweep_records(config)?;
    let rows: Vec<Vec<String>> = records.iter().map(SweepRecord::to_row).collect();
    csv::write_file(&config.output_path, &SWEEP_HEADER, &rows)
}

pub const DRIFT_HEADER: [&str; 3] = ["time", "mean_v", "replica_stderr"];

/// `drift-check` subcommand: Monte Carlo decay curve of the Lyapunov
/// function from a user-supplied start, with per-point standard errors.
pub fn run_drift_check(config: &ExperimentConfig) -> Result<(), Error> {
    let lambda = first_lambda(config)?;
    let sampler_cfg =
        SamplerConfig::new(lambda, config.horowitz_angle, config.step_length, config.seed)?;
    let dim = config.dim();
    let position = config
        .initial_position
        .clone()
        .ok_or_else(|| Error::invalid("drift-check requires initial_position"))?;
    let momentum = config.initial_momentum.clone().unwrap_or_else(|| vec![0.0; dim]);
    if position.len() != dim || momentum.len() != dim {
        return Err(Error::invalid(format!(
            "initial state must have dimension {dim} (got position {}, momentum {})",
            position.len(),
            momentum.len()
        )));
    }
    let z0 = PhaseState::new(position, momentum)?;

    let curve = match config.scenario {
        Scenario::DoubleWell2d => {
            let target = DoubleWell2D;
            let flow = VerletFlow::new(&target, config.step_length);
            drift_verify(&target, &flow, &sampler_cfg, &z0, config.horizon, config.replicas)
        }
        _ => {
            let target = DiagonalGaussianTarget::new(config.sigmas.clone())?;
            let flow = ExactGaussianFlow::for_target(&target);
            drift_verify(&target, &flow, &sampler_cfg, &z0, config.horizon, config.replicas)
        }
    };

    let rows: Vec<Vec<String>> = curve
        .iter()
        .map(|p| {
            vec![
                csv::format_real(p.time),
                csv::format_real(p.mean_v),
                p.stderr.map(csv::format_real).unwrap_or_default(),
            ]
        })
        .collect();
    csv::write_file(&config.output_path, &DRIFT_HEADER, &rows)
}

pub const BIAS_HEADER: [&str; 4] = ["h", "time_weighted_q2", "bias", "n_events"];

/// One variant-bias measurement: the time-weighted second moment of the
/// position on the 1D standard normal and its deviation from one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasRecord {
    pub h: f64,
    pub time_weighted_q2: f64,
    pub bias: f64,
    pub n_events: usize,
}

/// Computes the bias table for every step length in `h_grid`.
pub fn variant_bias_records(config: &ExperimentConfig) -> Result<Vec<BiasRecord>, Error> {
    if !config.sampler.is_variant() {
        return Err(Error::invalid(format!(
            "variant-bias requires sampler variant1 or variant2, got {}",
            config.sampler.name()
        )));
    }
    if config.scenario != Scenario::Gaussian1d {
        return Err(Error::invalid(format!(
            "variant-bias requires scenario gaussian1d, got {}",
            config.scenario.name()
        )));
    }
    let lambda = first_lambda(config)?;
    config
        .h_grid
        .par_iter()
        .enumerate()
        .map(|(g, &h)| {
            let sampler_cfg =
                SamplerConfig::new(lambda, config.horowitz_angle, h, config.seed)?;
            let target = DiagonalGaussianTarget::standard(1);
            let mut rng = RandomSource::new(config.seed, g as u64);
            let z0 = stationary_gaussian_state(&target, &mut rng);
            let path = match config.sampler {
                SamplerKind::Variant1 => {
                    variant1_chain(&target, &sampler_cfg, config.n_samples, &z0, &mut rng)?
                }
                SamplerKind::Variant2 => {
                    variant2_chain(&target, &sampler_cfg, config.n_samples, &z0, &mut rng)?
                }
                _ => unreachable!("checked above"),
            };
            let q2 = time_average(&path, |q, _| q[0] * q[0], path.final_time())?;
            Ok(BiasRecord {
                h,
                time_weighted_q2: q2,
                bias: q2 - 1.0,
                n_events: config.n_samples,
            })
        })
        .collect()
}

/// `variant-bias` subcommand.
pub fn run_variant_bias(config: &ExperimentConfig) -> Result<(), Error> {
    let records = variant_bias_records(config)?;
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            vec![
                csv::format_real(r.h),
                csv::format_real(r.time_weighted_q2),
                csv::format_real(r.bias),
                r.n_events.to_string(),
            ]
        })
        .collect();
    csv::write_file(&config.output_path, &BIAS_HEADER, &rows)
}

/// `sample` subcommand: raw chain dump with columns `t, q_1..q_D,
/// p_1..p_D`. Jump processes dump every stored state starting at the
/// initial one; fixed-duration chains report `t = (i+1)·λ`.
pub fn run_sample(config: &ExperimentConfig) -> Result<(), Error> {
    let lambda = first_lambda(config)?;
    let dim = config.dim();
    let header_owned: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=dim).map(|i| format!("q_{i}")))
        .chain((1..=dim).map(|i| format!("p_{i}")))
        .collect();
    let header: Vec<&str> = header_owned.iter().map(String::as_str).collect();

    let mut rng = RandomSource::new(config.seed, 0);
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut push_row = |t: f64, q: &[f64], p: &[f64]| {
        let mut row = Vec::with_capacity(1 + 2 * dim);
        row.push(csv::format_real(t));
        row.extend(q.iter().map(|x| csv::format_real(*x)));
        row.extend(p.iter().map(|x| csv::format_real(*x)));
        rows.push(row);
    };

    if config.sampler.is_variant() {
        let sampler_cfg = SamplerConfig::new(
            lambda,
            config.horowitz_angle,
            config.step_length,
            config.seed,
        )?;
        let (target, z0) = match config.scenario {
            Scenario::DoubleWell2d => {
                return Err(Error::invalid(
                    "variant samplers dump Gaussian scenarios only; use rhmc/hmc for the double well",
                ))
            }
            _ => {
                let target = DiagonalGaussianTarget::new(config.sigmas.clone())?;
                let z0 = stationary_gaussian_state(&target, &mut rng);
                (target, z0)
            }
        };
        let path = match config.sampler {
            SamplerKind::Variant1 => {
                variant1_chain(&target, &sampler_cfg, config.n_samples, &z0, &mut rng)?
            }
            _ => variant2_chain(&target, &sampler_cfg, config.n_samples, &z0, &mut rng)?,
        };
        for i in 0..path.len() {
            push_row(path.times()[i], path.position(i), path.momentum(i));
        }
    } else {
        let chain = scenario_chain(config, lambda, &mut rng)?;
        for i in 0..chain.len() {
            let t = chain
                .jump_times()
                .get(i)
                .copied()
                .unwrap_or((i + 1) as f64 * lambda);
            push_row(t, chain.position(i), chain.momentum(i));
        }
    }
    csv::write_file(&config.output_path, &header, &rows)
}

fn first_lambda(config: &ExperimentConfig) -> Result<f64, Error> {
    config
        .lambda_grid
        .first()
        .copied()
        .ok_or_else(|| Error::invalid("lambda_grid must contain at least one duration"))
}
