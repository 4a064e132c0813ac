//! The four samplers, the momentum-randomization map, and the seeded
//! randomness they share.
//!
//! All samplers target the Boltzmann-Gibbs density `∝ exp(-H(q, p))`:
//!
//! * [`hmc_chain`] — classical fixed-duration chains: draw a fresh
//!   momentum, run the Hamiltonian flow for a constant duration, record
//!   the position.
//! * [`hmc_metropolis_chain`] — the same with a Verlet proposal and a
//!   Metropolis accept/reject step correcting the integration error.
//! * [`rhmc_chain`] — randomized durations: each flow leg lasts an
//!   independent `Exp(1/λ)` time, after which the momentum is partially
//!   refreshed through the Horowitz angle.
//! * [`variant1_chain`] / [`variant2_chain`] — Markov jump processes on
//!   phase space whose holding times are exponential with mean
//!   `hλ/(h+λ)`; each jump either refreshes the momentum or advances one
//!   Verlet step. Variant #2 adds Metropolis-weighted momentum flips,
//!   which removes the stationary bias of Variant #1.
//!
//! Randomness is deterministic and stream-addressed: a
//! [`RandomSource`] is seeded by a `(master seed, stream index)` pair and
//! yields the same draws on every platform. Per event the draws are
//! consumed in a fixed order — holding time first, then the branch
//! uniform (jump processes only), then the normal vector of a momentum
//! refreshment — so a seed pins down the whole path.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dynamics::{momentum_flip, verlet_step, FlowMap};
use crate::error::Error;
use crate::model::{hamiltonian, DiagonalGaussianTarget, PhaseState, SamplerConfig, TargetModel};

/// Deterministic pseudo-random stream addressed by `(seed, stream)`.
///
/// Identical pairs replay identical draw sequences across runs and
/// platforms; distinct stream indices give statistically independent
/// streams, so concurrent chains can share one master seed.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RandomSource { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// One standard normal draw.
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Fills `out` with independent standard normal draws.
    pub fn fill_standard_normal(&mut self, out: &mut [f64]) {
        for x in out {
            *x = self.rng.sample(StandardNormal);
        }
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    /// Uniform draw on `(0, 1]`, safe to pass to a logarithm.
    pub fn uniform_open_closed(&mut self) -> f64 {
        1.0 - self.rng.random::<f64>()
    }
}

/// Inverse CDF of the exponential distribution with mean `lambda`,
/// evaluated at `u ∈ (0, 1]`: `-λ ln(u)`.
pub fn exponential_inverse_cdf(lambda: f64, u: f64) -> f64 {
    assert!(lambda > 0.0, "exponential mean must be positive, got {lambda}");
    assert!(u > 0.0 && u <= 1.0, "quantile argument must lie in (0, 1], got {u}");
    -lambda * u.ln()
}

/// Draws an exponential duration with mean `lambda`.
pub fn draw_duration(lambda: f64, rng: &mut RandomSource) -> f64 {
    exponential_inverse_cdf(lambda, rng.uniform_open_closed())
}

/// Partial momentum refreshment `(q, p) → (q, cos(φ) p + sin(φ) ξ)` with
/// `ξ ~ N(0, 1)^D`.
///
/// `angle` must lie in `(0, π/2]`; at `π/2` the old momentum is discarded
/// entirely (its coefficient is exactly zero, not a rounded cosine).
/// Either way the map preserves a standard normal momentum marginal,
/// since `cos²(φ) + sin²(φ) = 1`.
pub fn momentum_randomize(z: &PhaseState, angle: f64, rng: &mut RandomSource) -> PhaseState {
    assert!(
        angle > 0.0 && angle <= FRAC_PI_2,
        "Horowitz angle must lie in (0, pi/2], got {angle}"
    );
    // Complete refreshment must not leak the previous momentum through the
    // rounding of cos(π/2).
    let (sin, cos) = if angle == FRAC_PI_2 { (1.0, 0.0) } else { angle.sin_cos() };
    let momentum = z
        .momentum
        .iter()
        .map(|&p| cos * p + sin * rng.standard_normal())
        .collect();
    PhaseState { position: z.position.clone(), momentum }
}

/// Draws a phase state exactly from the Boltzmann-Gibbs distribution of a
/// diagonal Gaussian target: `q_i ~ N(0, σ_i²)`, then `p ~ N(0, 1)^D`.
pub fn stationary_gaussian_state(
    target: &DiagonalGaussianTarget,
    rng: &mut RandomSource,
) -> PhaseState {
    let position = target.sigmas().iter().map(|s| s * rng.standard_normal()).collect();
    let momentum = (0..target.dim()).map(|_| rng.standard_normal()).collect();
    PhaseState { position, momentum }
}

/// Samples produced by a chain driver.
///
/// Positions and momenta are stored flat in row-major order (`len × dim`).
/// `jump_times` is empty for fixed-duration chains and strictly
/// increasing for randomized ones. `acceptance_count` is present only for
/// Metropolis-adjusted runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    dim: usize,
    positions: Vec<f64>,
    momenta: Vec<f64>,
    jump_times: Vec<f64>,
    acceptance_count: Option<u64>,
}

impl ChainOutput {
    fn with_capacity(dim: usize, n: usize, timed: bool, counted: bool) -> Self {
        ChainOutput {
            dim,
            positions: Vec::with_capacity(n * dim),
            momenta: Vec::with_capacity(n * dim),
            jump_times: if timed { Vec::with_capacity(n) } else { Vec::new() },
            acceptance_count: if counted { Some(0) } else { None },
        }
    }

    fn push(&mut self, state: &PhaseState, time: Option<f64>) {
        self.positions.extend_from_slice(&state.position);
        self.momenta.extend_from_slice(&state.momentum);
        if let Some(t) = time {
            self.jump_times.push(t);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of recorded samples.
    pub fn len(&self) -> usize {
        self.positions.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn momentum(&self, i: usize) -> &[f64] {
        &self.momenta[i * self.dim..(i + 1) * self.dim]
    }

    /// Copies out the series of one position component.
    pub fn component(&self, k: usize) -> Vec<f64> {
        assert!(k < self.dim, "component {k} out of range for dimension {}", self.dim);
        self.positions.iter().skip(k).step_by(self.dim).copied().collect()
    }

    /// Applies `f(q, p)` to every sample.
    pub fn observable<F: Fn(&[f64], &[f64]) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.len()).map(|i| f(self.position(i), self.momentum(i))).collect()
    }

    /// Flat row-major position storage.
    pub fn positions_flat(&self) -> &[f64] {
        &self.positions
    }

    /// Jump times `t_1 < t_2 < …` (empty for fixed-duration chains).
    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn acceptance_count(&self) -> Option<u64> {
        self.acceptance_count
    }

    pub fn acceptance_rate(&self) -> Option<f64> {
        self.acceptance_count.map(|c| c as f64 / self.len() as f64)
    }

    /// Drops the first `n` samples (burn-in).
    pub fn discard_prefix(&mut self, n: usize) {
        let n = n.min(self.len());
        self.positions.drain(..n * self.dim);
        self.momenta.drain(..n * self.dim);
        if !self.jump_times.is_empty() {
            self.jump_times.drain(..n);
        }
    }
}

/// What a single jump of a jump-process sampler did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpKind {
    /// Momentum refreshment through the Horowitz angle.
    Randomize,
    /// One Verlet step of length `h`.
    Integrate,
    /// Momentum sign flip (Variant #2 only).
    Flip,
}

/// Piecewise-constant path of a Markov jump process on phase space.
///
/// State `i` holds on `[times[i], times[i+1])`; the first entry is the
/// initial state at time zero. `kinds[i]` records the jump that produced
/// state `i + 1`, so `kinds` is one element shorter than `times`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpPath {
    dim: usize,
    times: Vec<f64>,
    positions: Vec<f64>,
    momenta: Vec<f64>,
    kinds: Vec<JumpKind>,
}

impl JumpPath {
    fn new(dim: usize, n_jumps: usize, z0: &PhaseState) -> Self {
        let mut path = JumpPath {
            dim,
            times: Vec::with_capacity(n_jumps + 1),
            positions: Vec::with_capacity((n_jumps + 1) * dim),
            momenta: Vec::with_capacity((n_jumps + 1) * dim),
            kinds: Vec::with_capacity(n_jumps),
        };
        path.times.push(0.0);
        path.positions.extend_from_slice(&z0.position);
        path.momenta.extend_from_slice(&z0.momentum);
        path
    }

    fn push(&mut self, time: f64, state: &PhaseState, kind: JumpKind) {
        self.times.push(time);
        self.positions.extend_from_slice(&state.position);
        self.momenta.extend_from_slice(&state.momentum);
        self.kinds.push(kind);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored states (jumps + 1).
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false // always holds the initial state
    }

    pub fn n_jumps(&self) -> usize {
        self.kinds.len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn kinds(&self) -> &[JumpKind] {
        &self.kinds
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("path holds at least the initial state")
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn momentum(&self, i: usize) -> &[f64] {
        &self.momenta[i * self.dim..(i + 1) * self.dim]
    }

    pub fn state(&self, i: usize) -> PhaseState {
        PhaseState {
            position: self.position(i).to_vec(),
            momentum: self.momentum(i).to_vec(),
        }
    }
}

/// Time average `(1/horizon) ∫₀^horizon f(Q(s), P(s)) ds` of an observable
/// along a piecewise-constant path:
///
/// `Σ_i f(state_i) · (horizon ∧ t_{i+1} - horizon ∧ t_i)`.
///
/// `horizon` must be positive and covered by the path.
pub fn time_average<F>(path: &JumpPath, f: F, horizon: f64) -> Result<f64, Error>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    if !(horizon > 0.0) || horizon > path.final_time() {
        return Err(Error::HorizonBeyondPath { horizon, coverage: path.final_time() });
    }
    let mut sum = 0.0;
    for i in 0..path.len() {
        let start = path.times[i];
        if start >= horizon {
            break;
        }
        let end = path.times.get(i + 1).copied().unwrap_or(f64::INFINITY);
        let weight = end.min(horizon) - start;
        sum += f(path.position(i), path.momentum(i)) * weight;
    }
    Ok(sum / horizon)
}

fn check_finite(state: &PhaseState, event: usize, recorded: usize) -> Result<(), Error> {
    if state.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteState { event, recorded })
    }
}

/// Classical fixed-duration chain.
///
/// Each step draws a complete fresh momentum `ξ ~ N(0, 1)^D`, runs `flow`
/// for exactly `duration`, and records the end position, so sample `i` is
/// the position after `i + 1` flow legs from `x0`.
pub fn hmc_chain<T, F>(
    target: &T,
    flow: &F,
    duration: f64,
    n_steps: usize,
    x0: &[f64],
    rng: &mut RandomSource,
) -> Result<ChainOutput, Error>
where
    T: TargetModel + ?Sized,
    F: FlowMap + ?Sized,
{
    assert_eq!(x0.len(), target.dim(), "initial position must have the target dimension");
    assert!(duration > 0.0, "duration must be positive, got {duration}");
    let mut out = ChainOutput::with_capacity(target.dim(), n_steps, false, false);
    let mut state = PhaseState {
        position: x0.to_vec(),
        momentum: vec![0.0; target.dim()],
    };
    for step in 0..n_steps {
        rng.fill_standard_normal(&mut state.momentum);
        state = flow.flow(&state, duration);
        check_finite(&state, step, out.len())?;
        out.push(&state, None);
    }
    Ok(out)
}

/// Fixed-duration chain with a Verlet proposal and Metropolis correction.
///
/// The proposal integrates for `duration` at step `dt` and is accepted
/// with probability `min(1, exp(H(z) - H(z')))`; on rejection the position
/// is repeated. In the small-`dt` limit the energy error is `O(dt²)` and
/// the chain becomes rejection-free.
pub fn hmc_metropolis_chain<T>(
    target: &T,
    duration: f64,
    dt: f64,
    n_steps: usize,
    x0: &[f64],
    rng: &mut RandomSource,
) -> Result<ChainOutput, Error>
where
    T: TargetModel + ?Sized,
{
    assert_eq!(x0.len(), target.dim(), "initial position must have the target dimension");
    assert!(duration > 0.0, "duration must be positive, got {duration}");
    let mut out = ChainOutput::with_capacity(target.dim(), n_steps, false, true);
    let mut state = PhaseState {
        position: x0.to_vec(),
        momentum: vec![0.0; target.dim()],
    };
    let mut accepted = 0u64;
    for step in 0..n_steps {
        rng.fill_standard_normal(&mut state.momentum);
        let energy_before = hamiltonian(target, &state);
        let proposal = crate::dynamics::verlet_flow(target, &state, duration, dt);
        check_finite(&proposal, step, out.len())?;
        let energy_after = hamiltonian(target, &proposal);
        // min(1, exp(-ΔH)); a uniform on [0, 1) always accepts when ΔH ≤ 0.
        if rng.uniform() < (energy_before - energy_after).exp() {
            state = proposal;
            accepted += 1;
        }
        out.push(&state, None);
    }
    out.acceptance_count = Some(accepted);
    Ok(out)
}

/// Randomized-duration chain.
///
/// Per event: draw `δt ~ Exp(mean λ)`, run `flow` for `δt`, refresh the
/// momentum through the Horowitz angle, and record the jump time and the
/// position. The recorded momentum is the post-refreshment one, i.e. the
/// state the process continues from.
pub fn rhmc_chain<T, F>(
    target: &T,
    flow: &F,
    cfg: &SamplerConfig,
    n_events: usize,
    z0: &PhaseState,
    rng: &mut RandomSource,
) -> Result<ChainOutput, Error>
where
    T: TargetModel + ?Sized,
    F: FlowMap + ?Sized,
{
    assert_eq!(z0.dim(), target.dim(), "initial state must have the target dimension");
    let mut out = ChainOutput::with_capacity(target.dim(), n_events, true, false);
    let mut state = z0.clone();
    let mut time = 0.0;
    for event in 0..n_events {
        let holding = draw_duration(cfg.mean_duration, rng);
        time += holding;
        state = flow.flow(&state, holding);
        check_finite(&state, event, out.len())?;
        state = momentum_randomize(&state, cfg.horowitz_angle, rng);
        out.push(&state, Some(time));
    }
    Ok(out)
}

/// Jump probabilities shared by the two variants: holding times are
/// exponential with mean `hλ/(h+λ)` and a refreshment happens with
/// probability `h/(h+λ)` per jump.
fn jump_parameters(cfg: &SamplerConfig) -> (f64, f64) {
    let (h, lambda) = (cfg.step_length, cfg.mean_duration);
    (h * lambda / (h + lambda), h / (h + lambda))
}

/// Markov jump process approximating the randomized chain.
///
/// Per jump: draw the holding time, then a uniform `u`; refresh the
/// momentum if `u ≤ h/(h+λ)`, otherwise advance one Verlet step of length
/// `h`. Its stationary distribution carries an `O(h²)`-small integrator
/// bias (see [`variant2_chain`] for the unbiased version).
pub fn variant1_chain<T>(
    target: &T,
    cfg: &SamplerConfig,
    n_events: usize,
    z0: &PhaseState,
    rng: &mut RandomSource,
) -> Result<JumpPath, Error>
where
    T: TargetModel + ?Sized,
{
    assert_eq!(z0.dim(), target.dim(), "initial state must have the target dimension");
    let (mean_holding, p_randomize) = jump_parameters(cfg);
    let mut path = JumpPath::new(target.dim(), n_events, z0);
    let mut state = z0.clone();
    let mut time = 0.0;
    for event in 0..n_events {
        time += draw_duration(mean_holding, rng);
        let u = rng.uniform();
        let kind = if u <= p_randomize {
            state = momentum_randomize(&state, cfg.horowitz_angle, rng);
            JumpKind::Randomize
        } else {
            state = verlet_step(target, &state, cfg.step_length);
            JumpKind::Integrate
        };
        check_finite(&state, event, path.n_jumps())?;
        path.push(time, &state, kind);
    }
    Ok(path)
}

/// Unbiased Markov jump process.
///
/// Like [`variant1_chain`], but a proposed Verlet step is only taken with
/// the Metropolis weight `α_h = min(1, exp(H(z) - H(θ_h z)))` and the
/// momentum is flipped otherwise, so the three branches have
/// probabilities `h/(h+λ)`, `α_h λ/(h+λ)` and `(1-α_h) λ/(h+λ)`. For a
/// reversible, volume-preserving step this leaves `exp(-H)` exactly
/// invariant for every `h`.
pub fn variant2_chain<T>(
    target: &T,
    cfg: &SamplerConfig,
    n_events: usize,
    z0: &PhaseState,
    rng: &mut RandomSource,
) -> Result<JumpPath, Error>
where
    T: TargetModel + ?Sized,
{
    assert_eq!(z0.dim(), target.dim(), "initial state must have the target dimension");
    let (mean_holding, p_randomize) = jump_parameters(cfg);
    let (h, lambda) = (cfg.step_length, cfg.mean_duration);
    let mut path = JumpPath::new(target.dim(), n_events, z0);
    let mut state = z0.clone();
    let mut time = 0.0;
    for event in 0..n_events {
        time += draw_duration(mean_holding, rng);
        let u = rng.uniform();
        let kind = if u <= p_randomize {
            state = momentum_randomize(&state, cfg.horowitz_angle, rng);
            JumpKind::Randomize
        } else {
            let proposal = verlet_step(target, &state, h);
            check_finite(&proposal, event, path.n_jumps())?;
            // Energy differences stay in the exponent so large |ΔH| cannot
            // overflow a density ratio.
            let alpha = (hamiltonian(target, &state) - hamiltonian(target, &proposal))
                .exp()
                .min(1.0);
            if u <= (h + alpha * lambda) / (h + lambda) {
                state = proposal;
                JumpKind::Integrate
            } else {
                state = momentum_flip(&state);
                JumpKind::Flip
            }
        };
        check_finite(&state, event, path.n_jumps())?;
        path.push(time, &state, kind);
    }
    Ok(path)
}
