//! Randomized Hamiltonian Monte Carlo.
//!
//! Classical Hamiltonian Monte Carlo moves by integrating Hamilton's
//! equations for a fixed duration between momentum refreshments. That
//! duration is a delicate tuning knob: on a Gaussian target the flow is a
//! rotation, so durations near a full period produce a chain that barely
//! moves and durations near a half period produce a non-ergodic flip-flop.
//! This crate implements the randomized alternative — flow legs whose
//! durations are independent exponential random variables with mean `λ`,
//! followed by partial momentum refreshment through a Horowitz angle —
//! together with the classical sampler, two Markov-jump-process
//! discretizations that avoid small-step-size requirements, and the
//! diagnostics used to compare them.
//!
//! # Modules
//!
//! * [`model`] — phase states, target distributions (diagonal Gaussians,
//!   a 2D double well), sampler parameters.
//! * [`dynamics`] — the closed-form Gaussian flow, the Verlet integrator,
//!   and reversibility/volume-preservation checks.
//! * [`samplers`] — fixed-duration chains (with and without Metropolis
//!   correction), randomized-duration chains, and the two jump-process
//!   variants with their deterministic seeded randomness.
//! * [`analysis`] — integrated autocorrelation times, mean-squared
//!   displacements, their closed forms on Gaussian targets, and the
//!   Lyapunov drift verifier.
//! * [`cli`] — the benchmark runner behind the `rhmc` binary.
//!
//! # Example
//!
//! Sample a standard normal with randomized durations and check the
//! autocorrelation time against its closed form `1 + 2σ²/λ²`:
//!
//! ```
//! use rhmc::analysis::{iac_estimate, iac_rhmc_formula};
//! use rhmc::dynamics::ExactGaussianFlow;
//! use rhmc::model::{DiagonalGaussianTarget, SamplerConfig};
//! use rhmc::samplers::{rhmc_chain, stationary_gaussian_state, RandomSource};
//!
//! let target = DiagonalGaussianTarget::standard(1);
//! let flow = ExactGaussianFlow::for_target(&target);
//! let cfg = SamplerConfig::new(2.0, std::f64::consts::FRAC_PI_2, 1e-3, 42)?;
//!
//! let mut rng = RandomSource::new(cfg.seed, 0);
//! let z0 = stationary_gaussian_state(&target, &mut rng);
//! let chain = rhmc_chain(&target, &flow, &cfg, 40_000, &z0, &mut rng)?;
//!
//! let iac = iac_estimate(&chain.component(0))?;
//! let predicted = iac_rhmc_formula(1.0, cfg.mean_duration);
//! assert!((iac.value - predicted).abs() / predicted < 0.2);
//! # Ok::<(), rhmc::Error>(())
//! ```
//!
//! The runnable programs under `examples/` walk through each capability:
//! duration sweeps, the displacement plateau, the double well, drift
//! verification, and the jump-process variants.

pub mod analysis;
pub mod cli;
pub mod dynamics;
mod error;
pub mod model;
pub mod samplers;

pub use error::Error;
