//! Sampling-quality diagnostics: integrated autocorrelation times,
//! mean-squared displacements, their closed forms for diagonal Gaussian
//! targets, and the Lyapunov-drift verifier.

use rayon::prelude::*;

use crate::dynamics::FlowMap;
use crate::error::Error;
use crate::model::{hamiltonian, PhaseState, SamplerConfig, TargetModel};
use crate::samplers::{draw_duration, momentum_randomize, RandomSource};

/// Minimum series length accepted by [`iac_estimate`].
pub const IAC_MIN_LEN: usize = 100;

/// Window factor `c` of the self-consistent truncation rule.
const IAC_WINDOW_FACTOR: f64 = 5.0;

/// Integrated autocorrelation time of a scalar series.
///
/// `value` is `1` for i.i.d. samples and grows with the correlation
/// between successive samples; `window` is the truncation lag the
/// self-consistent rule settled on, and `n` the series length. A window
/// stuck at its cap (`max(10, n/10)`) signals autocovariances that do not
/// decay, in which case the value is unreliable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IacEstimate {
    pub value: f64,
    pub window: usize,
    pub n: usize,
}

impl IacEstimate {
    /// Large-`n` standard error of the windowed estimator,
    /// `value · sqrt((4 window + 2)/n)`.
    pub fn standard_error(&self) -> f64 {
        self.value.max(1.0) * ((4.0 * self.window as f64 + 2.0) / self.n as f64).sqrt()
    }
}

/// Estimates the integrated autocorrelation time `1 + 2 Σ_j ρ_j` with a
/// self-consistent truncation window of constant 5: the sum runs up to
/// the smallest lag `W ≥ 5 · max(τ_abs(W), 1)`, where
/// `τ_abs(W) = 1 + 2 Σ_{j≤W} |ρ_j|`.
///
/// Keying the window to the absolute sum bounds the truncation tail
/// `|Σ_{j>W} ρ_j|` regardless of the sign pattern; for nonnegative
/// autocorrelations it reduces to the classic rule, while anticorrelated
/// chains (whose signed τ is below one) still get a window on the scale
/// of their decay time instead of stopping at the first lag.
///
/// The series must hold at least [`IAC_MIN_LEN`] entries and must not be
/// constant. Negative truncated sums are clamped to zero (the estimand is
/// nonnegative).
pub fn iac_estimate(series: &[f64]) -> Result<IacEstimate, Error> {
    let n = series.len();
    if n < IAC_MIN_LEN {
        return Err(Error::SeriesTooShort { len: n, min: IAC_MIN_LEN });
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let c0 = centered.iter().map(|x| x * x).sum::<f64>() / n as f64;
    if c0 <= 1e-20 * (1.0 + mean * mean) {
        return Err(Error::DegenerateVariance);
    }

    let max_window = (n / 10).max(10).min(n - 1);
    let mut rho_sum = 0.0;
    let mut abs_sum = 0.0;
    let mut tau = 1.0;
    let mut window = max_window;
    for lag in 1..=max_window {
        let cov = centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64;
        let rho = cov / c0;
        rho_sum += rho;
        abs_sum += rho.abs();
        tau = 1.0 + 2.0 * rho_sum;
        let tau_abs = 1.0 + 2.0 * abs_sum;
        if lag as f64 >= IAC_WINDOW_FACTOR * tau_abs.max(1.0) {
            window = lag;
            break;
        }
    }
    Ok(IacEstimate { value: tau.max(0.0), window, n })
}

/// Closed-form autocorrelation time of the randomized chain on one
/// Gaussian component: `1 + 2 σ²/λ²`. Decreases monotonically in the mean
/// duration and plateaus at one.
pub fn iac_rhmc_formula(sigma: f64, lambda: f64) -> f64 {
    assert!(sigma > 0.0 && lambda > 0.0, "sigma and lambda must be positive");
    1.0 + 2.0 * sigma * sigma / (lambda * lambda)
}

/// Closed-form autocorrelation time of the fixed-duration chain on one
/// Gaussian component: `(1 + cos(λ/σ)) / (1 - cos(λ/σ))`.
///
/// Returns `+∞` at resonances (`λ/σ` an even multiple of `π`, where the
/// asymptotic variance diverges) and `0` at odd multiples.
pub fn iac_hmc_formula(sigma: f64, lambda: f64) -> f64 {
    assert!(sigma > 0.0 && lambda > 0.0, "sigma and lambda must be positive");
    let c = (lambda / sigma).cos();
    if 1.0 - c == 0.0 {
        f64::INFINITY
    } else {
        (1.0 + c) / (1.0 - c)
    }
}

/// Closed-form single-step equilibrium mean-squared displacement of the
/// randomized chain: `Σ_i 2 λ² σ_i² / (σ_i² + λ²)`. Monotone in `λ` with
/// plateau `Σ 2 σ_i²`.
pub fn msd_rhmc_formula(sigmas: &[f64], lambda: f64) -> f64 {
    assert!(lambda > 0.0, "lambda must be positive");
    assert!(!sigmas.is_empty() && sigmas.iter().all(|s| *s > 0.0));
    sigmas
        .iter()
        .map(|s| {
            let v = s * s;
            2.0 * lambda * lambda * v / (v + lambda * lambda)
        })
        .sum()
}

/// Closed-form single-step equilibrium mean-squared displacement of the
/// fixed-duration chain: `Σ_i 2 (1 - cos(λ/σ_i)) σ_i²` — oscillatory in
/// `λ`, vanishing at full rotations.
pub fn msd_hmc_formula(sigmas: &[f64], lambda: f64) -> f64 {
    assert!(lambda > 0.0, "lambda must be positive");
    assert!(!sigmas.is_empty() && sigmas.iter().all(|s| *s > 0.0));
    sigmas
        .iter()
        .map(|s| 2.0 * (1.0 - (lambda / s).cos()) * s * s)
        .sum()
}

/// The mean duration maximizing displacement per unit work, i.e. the
/// argmax of `msd_rhmc_formula(λ)/λ` — roughly the standard deviation of
/// the least constrained component.
///
/// Each component contributes `2λσ²/(σ² + λ²)`, increasing below `σ` and
/// decreasing above, so the peak lies in `[min σ, max σ]`; a coarse scan
/// brackets it and golden-section refines. For equal components the peak
/// is exactly `σ`. The often-quoted closed form `sqrt(Σσ⁴/Σσ²)` solves
/// the stationarity condition with its `(σ² + λ²)⁻²` weights dropped and
/// overshoots the true peak on heterogeneous targets.
pub fn optimal_lambda(sigmas: &[f64]) -> f64 {
    assert!(!sigmas.is_empty() && sigmas.iter().all(|s| *s > 0.0));
    let lo = sigmas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sigmas.iter().copied().fold(0.0, f64::max);
    if lo == hi {
        return lo;
    }
    let efficiency = |lambda: f64| msd_rhmc_formula(sigmas, lambda) / lambda;
    // A sum of unimodal terms need not be unimodal; scan first, then
    // refine inside the bracketing pair of scan cells.
    const SCAN: usize = 2048;
    let mut best = (0, f64::NEG_INFINITY);
    for k in 0..=SCAN {
        let lambda = lo + (hi - lo) * k as f64 / SCAN as f64;
        let f = efficiency(lambda);
        if f > best.1 {
            best = (k, f);
        }
    }
    let cell = (hi - lo) / SCAN as f64;
    let a = (lo + cell * (best.0.saturating_sub(1)) as f64).max(lo);
    let b = (lo + cell * (best.0 + 1) as f64).min(hi);
    golden_section_max(efficiency, a, b)
}

fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > 1e-12 * b.abs().max(1.0) {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Empirical single-step mean-squared displacement: the average squared
/// Euclidean distance between consecutive positions of a flat row-major
/// `n × dim` sample array.
pub fn msd_estimate(positions: &[f64], dim: usize) -> Result<f64, Error> {
    assert!(dim > 0, "dimension must be positive");
    assert_eq!(positions.len() % dim, 0, "flat position array must be a multiple of dim");
    let n = positions.len() / dim;
    if n < 2 {
        return Err(Error::TooFewPositions(n));
    }
    let sum: f64 = positions
        .windows(2 * dim)
        .step_by(dim)
        .map(|w| {
            let (a, b) = w.split_at(dim);
            a.iter().zip(b).map(|(x, y)| (y - x) * (y - x)).sum::<f64>()
        })
        .sum();
    Ok(sum / (n - 1) as f64)
}

/// Coefficients of the quadratic Lyapunov function
///
/// `V(z) = H(z) + c₁ ⟨q, p⟩ + c₂ |q|²/2`
///
/// with `c₁ = sin²(φ)/(4λ)` and `c₂ = c₁ (1 - cos(φ))/λ`. These choices
/// cancel the cross term in the generator drift and keep the quadratic
/// part positive definite (`c₂ > c₁²` for every angle in `(0, π/2]`), so
/// `V ≥ 0` whenever `Φ ≥ 0` and `V → ∞` with `|z|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovParams {
    pub c1: f64,
    pub c2: f64,
    pub lambda: f64,
    pub angle: f64,
}

impl LyapunovParams {
    pub fn new(lambda: f64, angle: f64) -> Self {
        assert!(lambda > 0.0, "lambda must be positive, got {lambda}");
        assert!(
            angle > 0.0 && angle <= std::f64::consts::FRAC_PI_2,
            "angle must lie in (0, pi/2], got {angle}"
        );
        let sin = angle.sin();
        let c1 = sin * sin / (4.0 * lambda);
        let c2 = c1 * (1.0 - angle.cos()) / lambda;
        assert!(c2 > c1 * c1, "positive definiteness requires c2 > c1^2");
        LyapunovParams { c1, c2, lambda, angle }
    }

    pub fn from_config(cfg: &SamplerConfig) -> Self {
        Self::new(cfg.mean_duration, cfg.horowitz_angle)
    }
}

/// Evaluates the Lyapunov function at a state. Nonnegative on targets
/// with `Φ ≥ 0` (all shipped targets).
pub fn lyapunov_value<T: TargetModel + ?Sized>(
    target: &T,
    z: &PhaseState,
    params: &LyapunovParams,
) -> f64 {
    let cross: f64 = z.position.iter().zip(&z.momentum).map(|(q, p)| q * p).sum();
    let q_sq: f64 = z.position.iter().map(|q| q * q).sum();
    hamiltonian(target, z) + params.c1 * cross + 0.5 * params.c2 * q_sq
}

/// Closed form of the generator applied to the Lyapunov function:
///
/// `L V(z) = -2 c₁ (|p|²/2 + ⟨∇Φ(q), q⟩/2) + D sin²(φ)/(2λ)`.
///
/// The constant term is the average energy injected by refreshments; the
/// negative term is the drift that pulls excursions back in.
pub fn generator_on_lyapunov<T: TargetModel + ?Sized>(
    target: &T,
    z: &PhaseState,
    params: &LyapunovParams,
) -> f64 {
    let kinetic: f64 = 0.5 * z.momentum.iter().map(|p| p * p).sum::<f64>();
    let grad = target.gradient(&z.position);
    let virial: f64 = grad.iter().zip(&z.position).map(|(g, q)| g * q).sum();
    let d = target.dim() as f64;
    let sin = params.angle.sin();
    -2.0 * params.c1 * (kinetic + 0.5 * virial) + d * sin * sin / (2.0 * params.lambda)
}

/// One point of an empirical drift curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftPoint {
    pub time: f64,
    pub mean_v: f64,
    /// Standard error over replicas; `None` for single-replica runs.
    pub stderr: Option<f64>,
}

/// Number of grid points a drift curve is sampled on.
pub const DRIFT_GRID_POINTS: usize = 50;

/// Runs `n_replicas` independent randomized chains from `z0` and records
/// the Monte Carlo mean (and standard error) of the Lyapunov function on
/// a uniform grid of [`DRIFT_GRID_POINTS`] times over `[0, horizon]`.
///
/// Replica `r` draws from stream `r` of the configured seed, so the curve
/// is deterministic and independent of worker scheduling. A zero horizon
/// collapses the grid to the single exact point `(0, V(z0))`.
pub fn drift_verify<T, F>(
    target: &T,
    flow: &F,
    cfg: &SamplerConfig,
    z0: &PhaseState,
    horizon: f64,
    n_replicas: usize,
) -> Vec<DriftPoint>
where
    T: TargetModel + ?Sized,
    F: FlowMap + ?Sized,
{
    assert!(horizon >= 0.0, "horizon must be nonnegative, got {horizon}");
    assert!(n_replicas > 0, "at least one replica is required");
    let params = LyapunovParams::from_config(cfg);
    if horizon == 0.0 {
        return vec![DriftPoint {
            time: 0.0,
            mean_v: lyapunov_value(target, z0, &params),
            stderr: None,
        }];
    }
    let times: Vec<f64> = (0..DRIFT_GRID_POINTS)
        .map(|k| horizon * k as f64 / (DRIFT_GRID_POINTS - 1) as f64)
        .collect();

    let curves: Vec<Vec<f64>> = (0..n_replicas)
        .into_par_iter()
        .map(|replica| {
            let mut rng = RandomSource::new(cfg.seed, replica as u64);
            let mut state = z0.clone();
            let mut state_time = 0.0;
            let mut next_jump = draw_duration(cfg.mean_duration, &mut rng);
            let mut curve = Vec::with_capacity(times.len());
            for &t in &times {
                while next_jump <= t {
                    state = flow.flow(&state, next_jump - state_time);
                    state = momentum_randomize(&state, cfg.horowitz_angle, &mut rng);
                    state_time = next_jump;
                    next_jump += draw_duration(cfg.mean_duration, &mut rng);
                }
                let probe = flow.flow(&state, t - state_time);
                curve.push(lyapunov_value(target, &probe, &params));
            }
            curve
        })
        .collect();

    // Reduce in replica order so the result does not depend on scheduling.
    times
        .iter()
        .enumerate()
        .map(|(k, &time)| {
            let mean = curves.iter().map(|c| c[k]).sum::<f64>() / n_replicas as f64;
            let stderr = (n_replicas > 1).then(|| {
                let var = curves.iter().map(|c| (c[k] - mean).powi(2)).sum::<f64>()
                    / (n_replicas - 1) as f64;
                (var / n_replicas as f64).sqrt()
            });
            DriftPoint { time, mean_v: mean, stderr }
        })
        .collect()
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Kolmogorov-Smirnov statistic of a weighted empirical CDF against a
/// reference CDF. Weights must be nonnegative with a positive sum; the
/// unweighted statistic is the special case of unit weights.
pub fn ks_statistic_weighted<C: Fn(f64) -> f64>(
    samples: &[f64],
    weights: &[f64],
    reference_cdf: C,
) -> f64 {
    assert_eq!(samples.len(), weights.len(), "one weight per sample");
    assert!(!samples.is_empty(), "need at least one sample");
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_unstable_by(|&a, &b| samples[a].total_cmp(&samples[b]));
    let total: f64 = weights.iter().sum();
    assert!(total > 0.0, "weights must not all vanish");
    let mut cum = 0.0;
    let mut d: f64 = 0.0;
    for &i in &order {
        let f = reference_cdf(samples[i]);
        d = d.max((cum / total - f).abs());
        cum += weights[i];
        d = d.max((cum / total - f).abs());
    }
    d
}

/// Unweighted Kolmogorov-Smirnov statistic.
pub fn ks_statistic<C: Fn(f64) -> f64>(samples: &[f64], reference_cdf: C) -> f64 {
    ks_statistic_weighted(samples, &vec![1.0; samples.len()], reference_cdf)
}

/// Asymptotic Kolmogorov-Smirnov critical value at level `alpha` for
/// `n_effective` independent samples: `sqrt(-ln(α/2)/2) / sqrt(n_eff)`.
pub fn ks_critical_value(alpha: f64, n_effective: f64) -> f64 {
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    assert!(n_effective > 0.0, "effective sample size must be positive");
    (-(alpha / 2.0).ln() / 2.0).sqrt() / n_effective.sqrt()
}
