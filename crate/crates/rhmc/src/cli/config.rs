//! Experiment configuration: flat `key=value` files, flag overrides, and
//! validation that reports every violation at once.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use crate::error::Error;

/// Default integrator step for Verlet-driven runs.
pub const DEFAULT_STEP_LENGTH: f64 = 1e-3;
/// Default partial-refreshment angle (complete refreshment).
pub const DEFAULT_HOROWITZ_ANGLE: f64 = FRAC_PI_2;
/// Default sample count for Gaussian scenarios.
pub const DEFAULT_GAUSSIAN_SAMPLES: usize = 1_000_000;
/// Default sample count for the double-well scenario (smoke scale; raise
/// `n_samples` for production runs).
pub const DEFAULT_DOUBLE_WELL_SAMPLES: usize = 10_000;
/// Events discarded as burn-in when no exact stationary draw exists.
pub const DOUBLE_WELL_BURN_IN: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Gaussian1d,
    Gaussian10d,
    DoubleWell2d,
    Custom,
}

impl Scenario {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "gaussian1d" => Some(Scenario::Gaussian1d),
            "gaussian10d" => Some(Scenario::Gaussian10d),
            "doublewell2d" => Some(Scenario::DoubleWell2d),
            "custom" => Some(Scenario::Custom),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Gaussian1d => "gaussian1d",
            Scenario::Gaussian10d => "gaussian10d",
            Scenario::DoubleWell2d => "doublewell2d",
            Scenario::Custom => "custom",
        }
    }

    /// Component standard deviations for Gaussian scenarios (`None` for
    /// the double well). The ten-dimensional preset uses `σ_i = i/10`.
    pub fn preset_sigmas(&self) -> Option<Vec<f64>> {
        match self {
            Scenario::Gaussian1d => Some(vec![1.0]),
            Scenario::Gaussian10d => Some((1..=10).map(|i| i as f64 / 10.0).collect()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    Hmc,
    HmcMetropolis,
    Rhmc,
    Variant1,
    Variant2,
}

impl SamplerKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "hmc" => Some(SamplerKind::Hmc),
            "hmc-metropolis" => Some(SamplerKind::HmcMetropolis),
            "rhmc" => Some(SamplerKind::Rhmc),
            "variant1" => Some(SamplerKind::Variant1),
            "variant2" => Some(SamplerKind::Variant2),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SamplerKind::Hmc => "hmc",
            SamplerKind::HmcMetropolis => "hmc-metropolis",
            SamplerKind::Rhmc => "rhmc",
            SamplerKind::Variant1 => "variant1",
            SamplerKind::Variant2 => "variant2",
        }
    }

    pub fn is_variant(&self) -> bool {
        matches!(self, SamplerKind::Variant1 | SamplerKind::Variant2)
    }
}

/// Untyped configuration as read from a file and/or command-line
/// overrides. Every value is kept as text so a single validation pass can
/// report all problems together.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    pub scenario: Option<String>,
    pub sampler: Option<String>,
    pub lambda_grid: Option<String>,
    pub horowitz_angle: Option<String>,
    pub step_length: Option<String>,
    pub n_samples: Option<String>,
    pub seed: Option<String>,
    pub output_path: Option<String>,
    pub sigmas: Option<String>,
    pub h_grid: Option<String>,
    pub horizon: Option<String>,
    pub replicas: Option<String>,
    pub initial_position: Option<String>,
    pub initial_momentum: Option<String>,
}

impl RawConfig {
    /// Parses a flat `key=value` file. Blank lines and lines starting
    /// with `#` are ignored; unknown keys are rejected.
    pub fn from_file(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)?;
        let mut raw = RawConfig::default();
        let mut problems = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                problems.push(format!(
                    "{}:{}: expected key=value, got {line:?}",
                    path.display(),
                    lineno + 1
                ));
                continue;
            };
            let value = value.trim().to_string();
            if !raw.set(key.trim(), value) {
                problems.push(format!(
                    "{}:{}: unknown key {:?}",
                    path.display(),
                    lineno + 1,
                    key.trim()
                ));
            }
        }
        if problems.is_empty() {
            Ok(raw)
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }

    fn set(&mut self, key: &str, value: String) -> bool {
        let slot = match key {
            "scenario" => &mut self.scenario,
            "sampler" => &mut self.sampler,
            "lambda_grid" => &mut self.lambda_grid,
            "horowitz_angle" => &mut self.horowitz_angle,
            "step_length" => &mut self.step_length,
            "n_samples" => &mut self.n_samples,
            "seed" => &mut self.seed,
            "output_path" => &mut self.output_path,
            "sigmas" => &mut self.sigmas,
            "h_grid" => &mut self.h_grid,
            "horizon" => &mut self.horizon,
            "replicas" => &mut self.replicas,
            "initial_position" => &mut self.initial_position,
            "initial_momentum" => &mut self.initial_momentum,
            _ => return false,
        };
        *slot = Some(value);
        true
    }

    /// Overlays `other` on top of `self`; set fields win.
    pub fn merge(mut self, other: RawConfig) -> Self {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if other.$field.is_some() { self.$field = other.$field; })*
            };
        }
        take!(
            scenario,
            sampler,
            lambda_grid,
            horowitz_angle,
            step_length,
            n_samples,
            seed,
            output_path,
            sigmas,
            h_grid,
            horizon,
            replicas,
            initial_position,
            initial_momentum
        );
        self
    }
}

/// A fully validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub sampler: SamplerKind,
    pub lambda_grid: Vec<f64>,
    pub horowitz_angle: f64,
    pub step_length: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub output_path: PathBuf,
    /// Component standard deviations (empty for the double well).
    pub sigmas: Vec<f64>,
    /// Extra keys consumed by specific subcommands.
    pub h_grid: Vec<f64>,
    pub horizon: f64,
    pub replicas: usize,
    pub initial_position: Option<Vec<f64>>,
    pub initial_momentum: Option<Vec<f64>>,
}

fn parse_real(
    raw: &Option<String>,
    key: &str,
    default: f64,
    problems: &mut Vec<String>,
) -> f64 {
    match raw {
        None => default,
        Some(text) => match text.parse::<f64>() {
            Ok(v) => v,
            Err(_) => {
                problems.push(format!("{key}: cannot parse {text:?} as a real number"));
                default
            }
        },
    }
}

fn parse_real_list(text: &str, key: &str, problems: &mut Vec<String>) -> Vec<f64> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        match part.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) => problems.push(format!("{key}: cannot parse entry {part:?}")),
        }
    }
    if out.is_empty() {
        problems.push(format!("{key}: list must contain at least one value"));
    }
    out
}

impl ExperimentConfig {
    /// Validates a raw configuration, reporting every violation.
    pub fn from_raw(raw: &RawConfig) -> Result<Self, Error> {
        let mut problems = Vec::new();

        let scenario = match &raw.scenario {
            None => {
                problems.push("scenario is required (gaussian1d, gaussian10d, doublewell2d, custom)".into());
                Scenario::Gaussian1d
            }
            Some(s) => Scenario::parse(s).unwrap_or_else(|| {
                problems.push(format!(
                    "scenario: unknown value {s:?} (expected gaussian1d, gaussian10d, doublewell2d or custom)"
                ));
                Scenario::Gaussian1d
            }),
        };

        let sampler = match &raw.sampler {
            None => {
                problems.push("sampler is required (hmc, hmc-metropolis, rhmc, variant1, variant2)".into());
                SamplerKind::Rhmc
            }
            Some(s) => SamplerKind::parse(s).unwrap_or_else(|| {
                problems.push(format!(
                    "sampler: unknown value {s:?} (expected hmc, hmc-metropolis, rhmc, variant1 or variant2)"
                ));
                SamplerKind::Rhmc
            }),
        };

        let lambda_grid = match &raw.lambda_grid {
            None => {
                problems.push("lambda_grid is required (comma-separated positive reals)".into());
                Vec::new()
            }
            Some(text) => {
                let grid = parse_real_list(text, "lambda_grid", &mut problems);
                for v in &grid {
                    if !(v.is_finite() && *v > 0.0) {
                        problems.push(format!("lambda_grid: every duration must be > 0, got {v}"));
                    }
                }
                grid
            }
        };

        let horowitz_angle =
            parse_real(&raw.horowitz_angle, "horowitz_angle", DEFAULT_HOROWITZ_ANGLE, &mut problems);
        if !(horowitz_angle.is_finite() && horowitz_angle > 0.0 && horowitz_angle <= FRAC_PI_2) {
            problems.push(format!(
                "horowitz_angle must lie in (0, pi/2]; got {horowitz_angle} (0 disables momentum refreshment and is rejected)"
            ));
        }

        let step_length =
            parse_real(&raw.step_length, "step_length", DEFAULT_STEP_LENGTH, &mut problems);
        if !(step_length.is_finite() && step_length > 0.0) {
            problems.push(format!("step_length must be > 0, got {step_length}"));
        }

        let default_samples = match scenario {
            Scenario::DoubleWell2d => DEFAULT_DOUBLE_WELL_SAMPLES,
            _ => DEFAULT_GAUSSIAN_SAMPLES,
        };
        let n_samples = match &raw.n_samples {
            None => default_samples,
            Some(text) => match text.parse::<usize>() {
                Ok(v) if v > 0 => v,
                Ok(v) => {
                    problems.push(format!("n_samples must be >= 1, got {v}"));
                    default_samples
                }
                Err(_) => {
                    problems.push(format!("n_samples: cannot parse {text:?} as an integer"));
                    default_samples
                }
            },
        };

        let seed = match &raw.seed {
            None => 0,
            Some(text) => match text.parse::<u64>() {
                Ok(v) => v,
                Err(_) => {
                    problems.push(format!("seed: cannot parse {text:?} as an unsigned integer"));
                    0
                }
            },
        };

        let output_path = match &raw.output_path {
            Some(p) if !p.is_empty() => PathBuf::from(p),
            _ => {
                problems.push("output_path is required".into());
                PathBuf::new()
            }
        };

        let sigmas = match scenario {
            Scenario::Custom => match &raw.sigmas {
                None => {
                    problems.push(
                        "sigmas is required for the custom scenario (comma-separated positive reals)".into(),
                    );
                    Vec::new()
                }
                Some(text) => {
                    let sigmas = parse_real_list(text, "sigmas", &mut problems);
                    for s in &sigmas {
                        if !(s.is_finite() && *s > 0.0) {
                            problems.push(format!("sigmas: every entry must be > 0, got {s}"));
                        }
                    }
                    sigmas
                }
            },
            _ => {
                if raw.sigmas.is_some() {
                    problems.push("sigmas may only be set for the custom scenario".into());
                }
                scenario.preset_sigmas().unwrap_or_default()
            }
        };

        let h_grid = match &raw.h_grid {
            None => vec![0.2, 0.1, 0.05],
            Some(text) => {
                let grid = parse_real_list(text, "h_grid", &mut problems);
                for v in &grid {
                    if !(v.is_finite() && *v > 0.0) {
                        problems.push(format!("h_grid: every step length must be > 0, got {v}"));
                    }
                }
                grid
            }
        };

        let horizon = parse_real(&raw.horizon, "horizon", 20.0, &mut problems);
        if !(horizon.is_finite() && horizon >= 0.0) {
            problems.push(format!("horizon must be >= 0, got {horizon}"));
        }

        let replicas = match &raw.replicas {
            None => 1000,
            Some(text) => match text.parse::<usize>() {
                Ok(v) if v > 0 => v,
                _ => {
                    problems.push(format!("replicas: expected a positive integer, got {text:?}"));
                    1000
                }
            },
        };

        let parse_vector = |raw: &Option<String>, key: &str, problems: &mut Vec<String>| {
            raw.as_ref().map(|text| {
                let v = parse_real_list(text, key, problems);
                for x in &v {
                    if !x.is_finite() {
                        problems.push(format!("{key}: entries must be finite"));
                    }
                }
                v
            })
        };
        let initial_position = parse_vector(&raw.initial_position, "initial_position", &mut problems);
        let initial_momentum = parse_vector(&raw.initial_momentum, "initial_momentum", &mut problems);

        if problems.is_empty() {
            Ok(ExperimentConfig {
                scenario,
                sampler,
                lambda_grid,
                horowitz_angle,
                step_length,
                n_samples,
                seed,
                output_path,
                sigmas,
                h_grid,
                horizon,
                replicas,
                initial_position,
                initial_momentum,
            })
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }

    /// Dimension of the configured scenario.
    pub fn dim(&self) -> usize {
        match self.scenario {
            Scenario::DoubleWell2d => 2,
            _ => self.sigmas.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_raw() -> RawConfig {
        RawConfig {
            scenario: Some("gaussian1d".into()),
            sampler: Some("rhmc".into()),
            lambda_grid: Some("0.5,1,2,4".into()),
            output_path: Some("out.csv".into()),
            ..RawConfig::default()
        }
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = ExperimentConfig::from_raw(&minimal_raw()).unwrap();
        assert_eq!(cfg.lambda_grid, vec![0.5, 1.0, 2.0, 4.0]);
        assert_eq!(cfg.horowitz_angle, DEFAULT_HOROWITZ_ANGLE);
        assert_eq!(cfg.step_length, DEFAULT_STEP_LENGTH);
        assert_eq!(cfg.n_samples, DEFAULT_GAUSSIAN_SAMPLES);
        assert_eq!(cfg.sigmas, vec![1.0]);
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn ten_dimensional_preset_sigmas() {
        let mut raw = minimal_raw();
        raw.scenario = Some("gaussian10d".into());
        let cfg = ExperimentConfig::from_raw(&raw).unwrap();
        assert_eq!(cfg.sigmas.len(), 10);
        assert!((cfg.sigmas[0] - 0.1).abs() < 1e-15);
        assert!((cfg.sigmas[9] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn double_well_defaults_to_smoke_scale() {
        let mut raw = minimal_raw();
        raw.scenario = Some("doublewell2d".into());
        let cfg = ExperimentConfig::from_raw(&raw).unwrap();
        assert_eq!(cfg.n_samples, DEFAULT_DOUBLE_WELL_SAMPLES);
        assert!(cfg.sigmas.is_empty());
        assert_eq!(cfg.dim(), 2);
    }

    #[test]
    fn validation_collects_every_violation() {
        let raw = RawConfig {
            scenario: Some("nope".into()),
            sampler: Some("bogus".into()),
            lambda_grid: Some("0,-1".into()),
            horowitz_angle: Some("0".into()),
            step_length: Some("-0.5".into()),
            output_path: None,
            ..RawConfig::default()
        };
        match ExperimentConfig::from_raw(&raw) {
            Err(Error::InvalidConfig(problems)) => {
                assert!(problems.len() >= 6, "got {problems:?}");
                assert!(problems.iter().any(|p| p.contains("horowitz_angle")));
                assert!(problems.iter().any(|p| p.contains("step_length")));
                assert!(problems.iter().any(|p| p.contains("output_path")));
            }
            other => panic!("expected InvalidConfig, got {other:?}"),
        }
    }

    #[test]
    fn file_parse_and_flag_override() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.cfg");
        std::fs::write(
            &path,
            "# comment\nscenario=gaussian1d\nsampler=rhmc\nlambda_grid=1,2\nseed=7\noutput_path=a.csv\n",
        )
        .unwrap();
        let file = RawConfig::from_file(&path).unwrap();
        let overrides = RawConfig {
            lambda_grid: Some("4".into()),
            ..RawConfig::default()
        };
        let cfg = ExperimentConfig::from_raw(&file.merge(overrides)).unwrap();
        assert_eq!(cfg.lambda_grid, vec![4.0]);
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.cfg");
        std::fs::write(&path, "scenario=gaussian1d\nwhatever=1\n").unwrap();
        assert!(matches!(
            RawConfig::from_file(&path),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn custom_scenario_requires_sigmas() {
        let mut raw = minimal_raw();
        raw.scenario = Some("custom".into());
        assert!(ExperimentConfig::from_raw(&raw).is_err());
        raw.sigmas = Some("0.5, 1.5".into());
        let cfg = ExperimentConfig::from_raw(&raw).unwrap();
        assert_eq!(cfg.sigmas, vec![0.5, 1.5]);
    }
}
