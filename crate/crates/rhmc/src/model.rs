//! Phase-space states, sampler parameters and target distributions.
//!
//! A sampler state is a position/momentum pair `z = (q, p)` in `R^D`.
//! Target distributions `π(dq) ∝ exp(-Φ(q)) dq` enter through the
//! [`TargetModel`] trait, which exposes the potential `Φ` and its gradient.
//! On the doubled space the samplers in this crate leave the
//! Boltzmann-Gibbs density `∝ exp(-H(q, p))` invariant, where
//! `H(q, p) = |p|²/2 + Φ(q)` is the total energy.

use std::f64::consts::FRAC_PI_2;

use crate::error::Error;

/// A position/momentum pair in `R^D`.
///
/// Both vectors always have the same length. States inside a chain are
/// kept finite; the chain drivers abort as soon as an integrator produces
/// a NaN or infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub position: Vec<f64>,
    pub momentum: Vec<f64>,
}

impl PhaseState {
    /// Builds a state from its components, checking that both vectors have
    /// the same nonzero length and contain only finite entries.
    pub fn new(position: Vec<f64>, momentum: Vec<f64>) -> Result<Self, Error> {
        let mut problems = Vec::new();
        if position.is_empty() {
            problems.push("position must have at least one component".to_string());
        }
        if position.len() != momentum.len() {
            problems.push(format!(
                "position has {} components but momentum has {}",
                position.len(),
                momentum.len()
            ));
        }
        if !position.iter().all(|x| x.is_finite()) {
            problems.push("position contains a non-finite entry".to_string());
        }
        if !momentum.iter().all(|x| x.is_finite()) {
            problems.push("momentum contains a non-finite entry".to_string());
        }
        if problems.is_empty() {
            Ok(PhaseState { position, momentum })
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }

    /// Number of position (and momentum) components.
    pub fn dim(&self) -> usize {
        self.position.len()
    }

    /// True when every entry of both vectors is finite.
    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|x| x.is_finite()) && self.momentum.iter().all(|x| x.is_finite())
    }
}

/// A target distribution `π(dq) ∝ exp(-Φ(q)) dq` on `R^D`.
///
/// Implementations must return a finite potential for every finite `q`,
/// and a gradient consistent with the potential (the test suites check
/// all shipped targets against central finite differences).
pub trait TargetModel: Sync {
    /// Dimension `D` of the position space.
    fn dim(&self) -> usize;

    /// Short identifier used in reports and output files.
    fn name(&self) -> &str;

    /// Potential energy `Φ(q)`. `q` must have length [`TargetModel::dim`].
    fn potential(&self, q: &[f64]) -> f64;

    /// Writes `∇Φ(q)` into `out`. Both slices must have length
    /// [`TargetModel::dim`].
    fn gradient_into(&self, q: &[f64], out: &mut [f64]);

    /// Allocating convenience form of [`TargetModel::gradient_into`].
    fn gradient(&self, q: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; q.len()];
        self.gradient_into(q, &mut out);
        out
    }
}

impl<T: TargetModel + ?Sized> TargetModel for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn name(&self) -> &str {
        (**self).name()
    }
    fn potential(&self, q: &[f64]) -> f64 {
        (**self).potential(q)
    }
    fn gradient_into(&self, q: &[f64], out: &mut [f64]) {
        (**self).gradient_into(q, out)
    }
}

/// Kinetic energy `|p|²/2`.
pub fn kinetic_energy(p: &[f64]) -> f64 {
    0.5 * p.iter().map(|x| x * x).sum::<f64>()
}

/// Total energy `H(z) = |p|²/2 + Φ(q)`.
///
/// Panics if the state dimension does not match the target dimension.
pub fn hamiltonian<T: TargetModel + ?Sized>(target: &T, z: &PhaseState) -> f64 {
    assert_eq!(
        z.dim(),
        target.dim(),
        "state dimension {} does not match target dimension {}",
        z.dim(),
        target.dim()
    );
    kinetic_energy(&z.momentum) + target.potential(&z.position)
}

/// Product of independent centered Gaussians with component standard
/// deviations `σ_1, …, σ_D`:
///
/// `Φ(q) = Σ_i q_i² / (2 σ_i²)`.
///
/// The Hamiltonian flow for this target is a componentwise rotation and
/// is available in closed form (see [`crate::dynamics::ExactGaussianFlow`]).
/// `Φ ≥ 0` with equality only at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalGaussianTarget {
    sigmas: Vec<f64>,
    inv_variances: Vec<f64>,
}

impl DiagonalGaussianTarget {
    /// Builds the target from strictly positive component standard
    /// deviations.
    pub fn new(sigmas: Vec<f64>) -> Result<Self, Error> {
        if sigmas.is_empty() {
            return Err(Error::invalid("sigmas must be nonempty"));
        }
        if let Some(bad) = sigmas.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::invalid(format!(
                "sigmas must be finite and strictly positive, got {bad}"
            )));
        }
        let inv_variances = sigmas.iter().map(|s| 1.0 / (s * s)).collect();
        Ok(DiagonalGaussianTarget { sigmas, inv_variances })
    }

    /// Standard normal target in `dim` dimensions (all `σ_i = 1`).
    pub fn standard(dim: usize) -> Self {
        Self::new(vec![1.0; dim]).expect("unit sigmas are valid")
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }
}

impl TargetModel for DiagonalGaussianTarget {
    fn dim(&self) -> usize {
        self.sigmas.len()
    }

    fn name(&self) -> &str {
        "diagonal-gaussian"
    }

    fn potential(&self, q: &[f64]) -> f64 {
        assert_eq!(q.len(), self.dim(), "position length must equal target dimension");
        0.5 * q
            .iter()
            .zip(&self.inv_variances)
            .map(|(x, w)| x * x * w)
            .sum::<f64>()
    }

    fn gradient_into(&self, q: &[f64], out: &mut [f64]) {
        assert_eq!(q.len(), self.dim(), "position length must equal target dimension");
        assert_eq!(out.len(), self.dim(), "gradient buffer length must equal target dimension");
        for ((g, x), w) in out.iter_mut().zip(q).zip(&self.inv_variances) {
            *g = x * w;
        }
    }
}

/// Two-dimensional double-well potential
///
/// `Φ(x₁, x₂) = 5 (x₂² - 1)² + 1.25 (x₂ - x₁/2)²`.
///
/// There are two minima at `(±2, ±1)` with `Φ = 0` and a saddle at the
/// origin; the potential is symmetric under `(x₁, x₂) → (-x₁, -x₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DoubleWell2D;

impl TargetModel for DoubleWell2D {
    fn dim(&self) -> usize {
        2
    }

    fn name(&self) -> &str {
        "double-well-2d"
    }

    fn potential(&self, q: &[f64]) -> f64 {
        assert_eq!(q.len(), 2, "position length must equal target dimension");
        let (x1, x2) = (q[0], q[1]);
        let a = x2 * x2 - 1.0;
        let b = x2 - 0.5 * x1;
        5.0 * a * a + 1.25 * b * b
    }

    fn gradient_into(&self, q: &[f64], out: &mut [f64]) {
        assert_eq!(q.len(), 2, "position length must equal target dimension");
        assert_eq!(out.len(), 2, "gradient buffer length must equal target dimension");
        let (x1, x2) = (q[0], q[1]);
        let b = x2 - 0.5 * x1;
        out[0] = -1.25 * b;
        out[1] = 20.0 * x2 * (x2 * x2 - 1.0) + 2.5 * b;
    }
}

/// Parameters shared by the randomized samplers.
///
/// * `mean_duration` — mean `λ` of the exponentially distributed flow
///   durations (also the deterministic duration of classical runs built
///   from the same configuration).
/// * `horowitz_angle` — partial-refreshment angle `φ ∈ (0, π/2]`; the new
///   momentum after a randomization is `cos(φ) p + sin(φ) ξ`. `φ = 0` is
///   rejected because it disables refreshment entirely and the dynamics
///   stops being ergodic. `φ = π/2` is complete refreshment.
/// * `step_length` — integrator step `h` used by the Verlet map and the
///   jump-process variants.
/// * `seed` — master seed; chains derive independent streams from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub mean_duration: f64,
    pub horowitz_angle: f64,
    pub step_length: f64,
    pub seed: u64,
}

impl SamplerConfig {
    /// Validates every field and reports all violations at once.
    pub fn new(
        mean_duration: f64,
        horowitz_angle: f64,
        step_length: f64,
        seed: u64,
    ) -> Result<Self, Error> {
        let mut problems = Vec::new();
        if !(mean_duration.is_finite() && mean_duration > 0.0) {
            problems.push(format!(
                "mean_duration must be finite and > 0, got {mean_duration}"
            ));
        }
        if !(horowitz_angle.is_finite() && horowitz_angle > 0.0 && horowitz_angle <= FRAC_PI_2) {
            problems.push(format!(
                "horowitz_angle must lie in (0, pi/2]; got {horowitz_angle} (0 disables refreshment and is rejected)"
            ));
        }
        if !(step_length.is_finite() && step_length > 0.0) {
            problems.push(format!(
                "step_length must be finite and > 0, got {step_length}"
            ));
        }
        if problems.is_empty() {
            Ok(SamplerConfig { mean_duration, horowitz_angle, step_length, seed })
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }
}
