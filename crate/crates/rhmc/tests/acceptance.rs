//! End-to-end acceptance suite.
//!
//! Each test covers one numbered exit criterion and prints a single
//! `criterion NN (name): PASS/FAIL` line (visible with `--nocapture`, or
//! automatically for failing tests). Tolerances are pinned in the
//! assertions.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};
use std::time::Instant;

use rhmc::analysis::{
    drift_verify, generator_on_lyapunov, iac_estimate, iac_hmc_formula, iac_rhmc_formula,
    ks_critical_value, ks_statistic_weighted, lyapunov_value, msd_estimate, msd_rhmc_formula,
    normal_cdf, optimal_lambda, LyapunovParams,
};
use rhmc::cli::config::{ExperimentConfig, RawConfig};
use rhmc::cli::run::{sweep_records, well_axis_observable, Statistic};
use rhmc::dynamics::{
    jacobian_determinant, momentum_flip, reversibility_defect, ExactGaussianFlow, FlowMap,
    VerletFlow,
};
use rhmc::model::{
    DiagonalGaussianTarget, DoubleWell2D, PhaseState, SamplerConfig, TargetModel,
};
use rhmc::samplers::{
    hmc_chain, momentum_randomize, rhmc_chain, stationary_gaussian_state, time_average,
    variant1_chain, variant2_chain, RandomSource,
};

const MASTER_SEED: u64 = 20260810;

fn report(number: u32, name: &str, pass: bool, detail: &str) -> bool {
    println!(
        "criterion {number:02} ({name}): {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn phase(q: &[f64], p: &[f64]) -> PhaseState {
    PhaseState::new(q.to_vec(), p.to_vec()).unwrap()
}

/// Criterion 1: empirical RHMC autocorrelation times on the 1D standard
/// normal match `1 + 2/λ²` within 10% relative for λ ∈ {0.5, 1, 2, 4}.
#[test]
fn criterion_01_rhmc_iac_matches_closed_form() {
    let started = Instant::now();
    let target = DiagonalGaussianTarget::standard(1);
    let flow = ExactGaussianFlow::for_target(&target);
    let mut detail = String::new();
    let mut pass = true;
    for (i, &lambda) in [0.5, 1.0, 2.0, 4.0].iter().enumerate() {
        let cfg = SamplerConfig::new(lambda, FRAC_PI_2, 1e-3, MASTER_SEED).unwrap();
        let mut rng = RandomSource::new(cfg.seed, i as u64);
        let z0 = stationary_gaussian_state(&target, &mut rng);
        let chain = rhmc_chain(&target, &flow, &cfg, 1_000_000, &z0, &mut rng).unwrap();
        let est = iac_estimate(&chain.component(0)).unwrap();
        let predicted = iac_rhmc_formula(1.0, lambda);
        let rel = (est.value - predicted).abs() / predicted;
        detail.push_str(&format!("λ={lambda}: {:.3} vs {predicted:.3} ({:.1}%); ", est.value, 100.0 * rel));
        pass &= rel <= 0.10;
    }
    detail.push_str(&format!("elapsed {:.1}s", started.elapsed().as_secs_f64()));
    assert!(report(1, "rhmc-iac-1d", pass, &detail), "{detail}");
}

/// Criterion 2: empirical fixed-duration autocorrelation times match
/// `(1+cos λ)/(1-cos λ)` within 15% relative or 0.05 absolute away from
/// resonances; the resonant durations π and 2π are flagged by the sweep.
#[test]
fn criterion_02_hmc_iac_matches_closed_form() {
    let target = DiagonalGaussianTarget::standard(1);
    let flow = ExactGaussianFlow::for_target(&target);
    let mut detail = String::new();
    let mut pass = true;
    for (i, &lambda) in [PI / 4.0, FRAC_PI_2, 3.0 * PI / 4.0, 1.5 * PI].iter().enumerate() {
        let mut rng = RandomSource::new(MASTER_SEED, 100 + i as u64);
        let z0 = stationary_gaussian_state(&target, &mut rng);
        let chain =
            hmc_chain(&target, &flow, lambda, 1_000_000, &z0.position, &mut rng).unwrap();
        let est = iac_estimate(&chain.component(0)).unwrap();
        let predicted = iac_hmc_formula(1.0, lambda);
        let abs = (est.value - predicted).abs();
        let rel = abs / predicted.abs().max(f64::MIN_POSITIVE);
        let ok = rel <= 0.15 || abs <= 0.05;
        detail.push_str(&format!(
            "λ={lambda:.3}: {:.3} vs {predicted:.3} ({}); ",
            est.value,
            if ok { "ok" } else { "off" }
        ));
        pass &= ok;
    }

    // Resonant durations are excluded from the comparison above and must
    // come back flagged from the sweep layer.
    let raw = RawConfig {
        scenario: Some("gaussian1d".into()),
        sampler: Some("hmc".into()),
        lambda_grid: Some(format!("{},{}", PI, 2.0 * PI)),
        n_samples: Some("20000".into()),
        seed: Some(MASTER_SEED.to_string()),
        output_path: Some("unused.csv".into()),
        ..RawConfig::default()
    };
    let config = ExperimentConfig::from_raw(&raw).unwrap();
    let records = sweep_records(&config).unwrap();
    let iac_rows: Vec<_> =
        records.iter().filter(|r| r.statistic == Statistic::Iac).collect();
    let flags_ok = iac_rows.len() == 2 && iac_rows.iter().all(|r| r.resonant);
    let odd_zero = iac_rows
        .iter()
        .any(|r| r.lambda < 4.0 && r.analytic.unwrap().abs() < 1e-12);
    let even_inf = iac_rows
        .iter()
        .any(|r| r.lambda > 4.0 && r.analytic.unwrap().is_infinite());
    detail.push_str(&format!(
        "resonances flagged: {flags_ok} (analytic 0 at π: {odd_zero}, ∞ at 2π: {even_inf})"
    ));
    pass &= flags_ok && odd_zero && even_inf;
    assert!(report(2, "hmc-iac-1d", pass, &detail), "{detail}");
}

/// Criterion 3: the 10D mean-squared displacement at λ = 8 matches
/// `Σ 2λ²σ²/(σ²+λ²)` within 3%, and the analytic large-λ plateau is
/// `Σ 2σ² = 7.7`.
#[test]
fn criterion_03_msd_plateau_10d() {
    let sigmas: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
    let target = DiagonalGaussianTarget::new(sigmas.clone()).unwrap();
    let flow = ExactGaussianFlow::for_target(&target);
    let lambda = 8.0;
    let cfg = SamplerConfig::new(lambda, FRAC_PI_2, 1e-3, MASTER_SEED).unwrap();
    let mut rng = RandomSource::new(cfg.seed, 200);
    let z0 = stationary_gaussian_state(&target, &mut rng);
    let chain = rhmc_chain(&target, &flow, &cfg, 1_000_000, &z0, &mut rng).unwrap();
    let empirical = msd_estimate(chain.positions_flat(), chain.dim()).unwrap();
    let predicted = msd_rhmc_formula(&sigmas, lambda);
    let rel = (empirical - predicted).abs() / predicted;

    let plateau = msd_rhmc_formula(&sigmas, 1e9);
    let plateau_ok = (plateau - 7.7).abs() < 1e-6;

    let pass = rel <= 0.03 && plateau_ok;
    let detail = format!(
        "MSD {empirical:.4} vs {predicted:.4} ({:.2}%); plateau {plateau:.4} vs 7.7",
        100.0 * rel
    );
    assert!(report(3, "msd-plateau-10d", pass, &detail), "{detail}");
}

/// Criterion 4: the exhaustively grid-searched maximizer of `MSD(λ)/λ`
/// over `(0, 3]` at 1e-4 resolution agrees with `optimal_lambda` within
/// 1e-3 for the 10D ladder and for 20 random σ vectors.
///
/// `optimal_lambda` locates the true efficiency peak (bracketed scan plus
/// golden-section); the frequently quoted closed form `sqrt(Σσ⁴/Σσ²)` is
/// exact only for equal-σ targets and would sit ~0.12 off the grid value
/// on the ladder (see the note on `rhmc::analysis::optimal_lambda`).
#[test]
fn criterion_04_efficiency_maximizer_grid_agreement() {
    let grid_argmax = |sigmas: &[f64]| -> f64 {
        let mut best = (0.0, f64::NEG_INFINITY);
        for k in 1..=30_000 {
            let lambda = 1e-4 * k as f64;
            let eff = msd_rhmc_formula(sigmas, lambda) / lambda;
            if eff > best.1 {
                best = (lambda, eff);
            }
        }
        best.0
    };

    let mut pass = true;
    let ladder: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
    let (grid, closed) = (grid_argmax(&ladder), optimal_lambda(&ladder));
    let mut worst = (grid - closed).abs();
    pass &= worst < 1e-3;

    let mut rng = RandomSource::new(MASTER_SEED, 300);
    for _ in 0..20 {
        let d = 2 + (rng.uniform() * 9.0) as usize;
        let sigmas: Vec<f64> = (0..d).map(|_| 0.2 + 2.3 * rng.uniform()).collect();
        let gap = (grid_argmax(&sigmas) - optimal_lambda(&sigmas)).abs();
        worst = worst.max(gap);
        pass &= gap < 1e-3;
    }
    let detail = format!(
        "10D ladder: grid {grid:.4} vs optimal_lambda {closed:.4}; worst gap {worst:.2e} (tolerance 1e-3)"
    );
    assert!(report(4, "efficiency-maximizer", pass, &detail), "{detail}");
}

/// Criterion 5: Variant #2 is unbiased — on the 1D standard normal with
/// h = 0.1, λ = 1 and 10⁷ jump events the time-weighted `E[q²]` is 1
/// within 2% and the time-weighted position law passes a KS test against
/// N(0, 1) at the 1% level (critical value at the chain's effective
/// sample size n/IAC).
#[test]
fn criterion_05_variant2_unbiasedness() {
    let started = Instant::now();
    let target = DiagonalGaussianTarget::standard(1);
    let cfg = SamplerConfig::new(1.0, FRAC_PI_2, 0.1, MASTER_SEED).unwrap();
    let mut rng = RandomSource::new(cfg.seed, 400);
    let z0 = stationary_gaussian_state(&target, &mut rng);
    let n = 10_000_000;
    let path = variant2_chain(&target, &cfg, n, &z0, &mut rng).unwrap();

    let horizon = path.final_time();
    let q2 = time_average(&path, |q, _| q[0] * q[0], horizon).unwrap();
    let bias_ok = (q2 - 1.0).abs() <= 0.02;

    // Weighted KS against the standard normal; holding intervals weight
    // each state, the final state holds no time inside the horizon.
    let m = path.len() - 1;
    let mut positions = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for i in 0..m {
        positions.push(path.position(i)[0]);
        weights.push(path.times()[i + 1] - path.times()[i]);
    }
    let d = ks_statistic_weighted(&positions, &weights, normal_cdf);
    // Successive jump states are correlated; deflate the sample count by
    // the event-indexed autocorrelation time.
    let iac = iac_estimate(&positions).unwrap();
    let n_eff = m as f64 / iac.value.max(1.0);
    let critical = ks_critical_value(0.01, n_eff);
    let ks_ok = d < critical;

    let pass = bias_ok && ks_ok;
    let detail = format!(
        "E[q²] = {q2:.4}; KS D = {d:.2e} vs critical {critical:.2e} (IAC {:.1}, n_eff {:.0}); elapsed {:.1}s",
        iac.value,
        n_eff,
        started.elapsed().as_secs_f64()
    );
    assert!(report(5, "variant2-unbiased", pass, &detail), "{detail}");
}

/// Criterion 6: Variant #1 bias scaling — `|E_h[q²] - 1|` on the 1D
/// standard normal for h ∈ {0.2, 0.1, 0.05} decreases with h and halving
/// h divides it by a factor in [1.5, 2.5].
///
/// Caveat on what this resolves: the chain's exact stationary law on the
/// Gaussian is `exp(-(p²/2 + (1 - h²/4) q²/2))` (both branch kernels
/// preserve it — see `variant1_gaussian_bias_matches_modified_energy` in
/// the samplers module), so the true bias is `h²/(4 - h²)`, which
/// QUARTERS when h halves. At 10⁷ events the Monte Carlo error
/// (≈ 2e-3) exceeds the true bias for the two smaller step lengths
/// (2.5e-3 and 6.3e-4), so the measured ratios blend bias with noise;
/// the stated window happens to hold under the frozen seed. The
/// assertion keeps the criterion exactly as stated.
#[test]
fn criterion_06_variant1_bias_scaling() {
    let target = DiagonalGaussianTarget::standard(1);
    let mut biases = Vec::new();
    let mut detail = String::new();
    for (i, &h) in [0.2, 0.1, 0.05].iter().enumerate() {
        let cfg = SamplerConfig::new(1.0, FRAC_PI_2, h, MASTER_SEED).unwrap();
        let mut rng = RandomSource::new(cfg.seed, 500 + i as u64);
        let z0 = stationary_gaussian_state(&target, &mut rng);
        let path = variant1_chain(&target, &cfg, 10_000_000, &z0, &mut rng).unwrap();
        let q2 = time_average(&path, |q, _| q[0] * q[0], path.final_time()).unwrap();
        let bias = (q2 - 1.0).abs();
        detail.push_str(&format!("h={h}: |bias| = {bias:.5}; "));
        biases.push(bias);
    }
    let decreasing = biases[0] > biases[1] && biases[1] > biases[2];
    let r01 = biases[0] / biases[1];
    let r12 = biases[1] / biases[2];
    let ratios_ok = (1.5..=2.5).contains(&r01) && (1.5..=2.5).contains(&r12);
    detail.push_str(&format!("decreasing: {decreasing}; ratios {r01:.2}, {r12:.2}"));
    let pass = decreasing && ratios_ok;
    assert!(
        report(6, "variant1-bias-scaling", pass, &detail),
        "known O(h²) (not O(h)) bias of the Verlet jump chain: {detail}"
    );
}

/// Criterion 7: one Verlet step is reversible (defect ≤ 1e-10) and
/// volume-preserving (|det - 1| ≤ 1e-6) on 100 random states for both
/// shipped targets.
#[test]
fn criterion_07_integrator_structure() {
    let gaussian = DiagonalGaussianTarget::new(vec![0.6, 1.4]).unwrap();
    let mut rng = RandomSource::new(MASTER_SEED, 600);
    let mut worst_defect: f64 = 0.0;
    let mut worst_det: f64 = 0.0;
    let mut check = |target: &dyn TargetModel, dt: f64, rng: &mut RandomSource| {
        for _ in 0..100 {
            let d = target.dim();
            let z = phase(
                &(0..d).map(|_| 4.0 * (rng.uniform() - 0.5)).collect::<Vec<_>>(),
                &(0..d).map(|_| 4.0 * (rng.uniform() - 0.5)).collect::<Vec<_>>(),
            );
            worst_defect = worst_defect.max(reversibility_defect(target, &z, dt));
            worst_det = worst_det.max((jacobian_determinant(target, &z, dt) - 1.0).abs());
        }
    };
    check(&gaussian, 0.1, &mut rng);
    check(&DoubleWell2D, 0.05, &mut rng);
    let pass = worst_defect <= 1e-10 && worst_det <= 1e-6;
    let detail = format!(
        "max reversibility defect {worst_defect:.2e} (≤ 1e-10); max |det-1| {worst_det:.2e} (≤ 1e-6)"
    );
    assert!(report(7, "integrator-structure", pass, &detail), "{detail}");
}

/// Criterion 8: the closed-form generator drift of the Lyapunov function
/// equals the finite-difference flow derivative plus the Monte Carlo
/// refreshment average, within 3 MC standard errors + 1e-6, on 20 random
/// states for (λ, φ) ∈ {(1, π/2), (2, π/3)}.
#[test]
fn criterion_08_generator_identity() {
    let target = DiagonalGaussianTarget::standard(1);
    let flow = ExactGaussianFlow::for_target(&target);
    let mut rng = RandomSource::new(MASTER_SEED, 700);
    let mut pass = true;
    let mut worst_sigma = 0.0f64;
    for &(lambda, angle) in &[(1.0, FRAC_PI_2), (2.0, FRAC_PI_3)] {
        let params = LyapunovParams::new(lambda, angle);
        for _ in 0..20 {
            let z = phase(
                &[6.0 * (rng.uniform() - 0.5)],
                &[6.0 * (rng.uniform() - 0.5)],
            );
            let closed = generator_on_lyapunov(&target, &z, &params);

            // Centered finite difference of V along the flow; the reverse
            // leg runs the flow on the momentum-flipped state.
            let eps = 1e-6;
            let forward = lyapunov_value(&target, &flow.flow(&z, eps), &params);
            let backward = lyapunov_value(
                &target,
                &momentum_flip(&flow.flow(&momentum_flip(&z), eps)),
                &params,
            );
            let liouville = (forward - backward) / (2.0 * eps);

            let draws = 1_000_000;
            let v0 = lyapunov_value(&target, &z, &params);
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..draws {
                let dv =
                    lyapunov_value(&target, &momentum_randomize(&z, angle, &mut rng), &params)
                        - v0;
                sum += dv;
                sum_sq += dv * dv;
            }
            let mc_mean = sum / draws as f64;
            let mc_var = (sum_sq / draws as f64 - mc_mean * mc_mean).max(0.0);
            let mc_stderr = (mc_var / draws as f64).sqrt() / lambda;
            let decomposed = liouville + mc_mean / lambda;
            let gap = (decomposed - closed).abs();
            let tolerance = 3.0 * mc_stderr + 1e-6;
            if gap > tolerance {
                pass = false;
            }
            worst_sigma = worst_sigma.max(gap / (mc_stderr + 1e-12));
        }
    }
    let detail = format!("worst |gap|/stderr = {worst_sigma:.2} (limit 3 + FD slack)");
    assert!(report(8, "generator-identity", pass, &detail), "{detail}");
}

/// Criterion 9: from z₀ = ((10), (0)) on the 1D standard normal with
/// λ = 1, φ = π/2, the 1000-replica mean-V curve is non-increasing within
/// 2 combined standard errors after the first grid point and plateaus
/// within 3 standard errors of the stationary mean 1.125.
#[test]
fn criterion_09_lyapunov_drift_decay() {
    let target = DiagonalGaussianTarget::standard(1);
    let flow = ExactGaussianFlow::for_target(&target);
    let cfg = SamplerConfig::new(1.0, FRAC_PI_2, 1e-3, MASTER_SEED).unwrap();
    let z0 = phase(&[10.0], &[0.0]);
    let curve = drift_verify(&target, &flow, &cfg, &z0, 20.0, 1000);

    let mut monotone = true;
    for w in curve.windows(2).skip(1) {
        let (a, b) = (&w[0], &w[1]);
        let combined =
            (a.stderr.unwrap().powi(2) + b.stderr.unwrap().powi(2)).sqrt();
        if b.mean_v > a.mean_v + 2.0 * combined {
            monotone = false;
        }
    }
    let last = curve.last().unwrap();
    let stationary = 1.125;
    let plateau_ok = (last.mean_v - stationary).abs() <= 3.0 * last.stderr.unwrap();

    let pass = monotone && plateau_ok;
    let detail = format!(
        "V(0) = {:.2}, final {:.4} ± {:.4} vs stationary {stationary}; monotone within 2 SE: {monotone}",
        curve[0].mean_v,
        last.mean_v,
        last.stderr.unwrap()
    );
    assert!(report(9, "lyapunov-drift", pass, &detail), "{detail}");
}

/// Criterion 10: on the 2D double well (randomized sampler, Verlet at
/// dt = 1e-3), the autocorrelation time of the observable `2x + y` is
/// non-increasing across λ ∈ {0.5, 1, 2} within estimator error, and both
/// wells carry occupancy 0.5 ± 0.05 over 10⁶ events.
#[test]
fn criterion_10_double_well_monotonicity() {
    let started = Instant::now();
    let target = DoubleWell2D;
    let flow = VerletFlow::new(&target, 1e-3);
    let burn_in = 10_000;
    let n = 1_000_000;
    let mut estimates = Vec::new();
    let mut occupancy_ok = true;
    let mut detail = String::new();
    for (i, &lambda) in [0.5, 1.0, 2.0].iter().enumerate() {
        let cfg = SamplerConfig::new(lambda, FRAC_PI_2, 1e-3, MASTER_SEED).unwrap();
        let mut rng = RandomSource::new(cfg.seed, 800 + i as u64);
        let z0 = phase(&[2.0, 1.0], &[rng.standard_normal(), rng.standard_normal()]);
        let mut chain = rhmc_chain(&target, &flow, &cfg, n + burn_in, &z0, &mut rng).unwrap();
        chain.discard_prefix(burn_in);
        let series = chain.observable(|q, _| well_axis_observable(q));
        let est = iac_estimate(&series).unwrap();
        let occupancy =
            series.iter().filter(|v| **v > 0.0).count() as f64 / series.len() as f64;
        occupancy_ok &= (occupancy - 0.5).abs() <= 0.05;
        detail.push_str(&format!(
            "λ={lambda}: IAC {:.1} ± {:.1}, occupancy {occupancy:.3}; ",
            est.value,
            est.standard_error()
        ));
        estimates.push(est);
    }
    let mut monotone = true;
    for w in estimates.windows(2) {
        let allowance =
            2.0 * (w[0].standard_error().powi(2) + w[1].standard_error().powi(2)).sqrt();
        if w[1].value > w[0].value + allowance {
            monotone = false;
        }
    }
    detail.push_str(&format!(
        "monotone within error: {monotone}; elapsed {:.1}s",
        started.elapsed().as_secs_f64()
    ));
    let pass = monotone && occupancy_ok;
    assert!(report(10, "double-well", pass, &detail), "{detail}");
}

/// Criterion 11: identical configuration and seed produce byte-identical
/// sweep CSV files.
#[test]
fn criterion_11_sweep_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let render = |path: &std::path::Path| -> Vec<u8> {
        let raw = RawConfig {
            scenario: Some("gaussian10d".into()),
            sampler: Some("rhmc".into()),
            lambda_grid: Some("0.5,1,2".into()),
            n_samples: Some("50000".into()),
            seed: Some(MASTER_SEED.to_string()),
            output_path: Some(path.to_string_lossy().into_owned()),
            ..RawConfig::default()
        };
        let config = ExperimentConfig::from_raw(&raw).unwrap();
        rhmc::cli::run::run_sweep(&config).unwrap();
        std::fs::read(path).unwrap()
    };
    let a = render(&dir.path().join("a.csv"));
    let b = render(&dir.path().join("b.csv"));
    let pass = a == b && !a.is_empty();
    let detail = format!("two runs, {} bytes each, identical: {}", a.len(), a == b);
    assert!(report(11, "sweep-determinism", pass, &detail), "{detail}");
}
