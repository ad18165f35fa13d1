//! Analytic solvers for the optimal stopping threshold.
//!
//! The optimal scheduler transmits at the first probe whose conditional
//! expected rate `R̄` reaches the threshold `x*`, where `x*` is the fixed point
//! of `x = Φ(x, λc)`:
//!
//! ```text
//!            ∫_{λ̂'}^∞ e^{-λ̂} R̄(λ̂) dλ̂
//! Φ(x, λc) = ─────────────────────────,     R̄(λ̂') = x
//!              δ/p_s + e^{-λ̂'}
//! ```
//!
//! For the linear backoff `λc(λ̂) = σ·ρ_eff·λ̂` both the threshold estimate
//! `λ̂'` and the integral have closed forms ([`phi_linear`]); for arbitrary
//! backoff functions [`phi_general`] falls back to root finding and
//! quadrature. The two routes are kept independent so each can check the
//! other. [`optimize_backoff`] searches the backoff ratio with a Dinkelbach
//! iteration.

mod dinkelbach;
mod general;
mod linear;
mod perfect;
mod studies;

use serde::Serialize;

pub use dinkelbach::{optimize_backoff, OptimizeConfig};
pub use general::{
    phi_general, phi_general_with, solve_fixed_point_general, threshold_estimate_general, BackoffFn,
    GeneralBackoffPolicy, PhiGeneralOptions,
};
pub use linear::{dinkelbach_u, dinkelbach_v, lambda_hat_prime_linear, phi_linear, solve_fixed_point_linear};
pub use perfect::{perfect_lambda_prime, phi_perfect, solve_perfect_csi};
pub use studies::{sweep_training_time, throughput_gain, ThroughputGain, TrainingPoint, TrainingSweep};

pub(crate) use linear::linear_uv;
pub(crate) use perfect::perfect_uv;

use crate::error::{DosError, Result};

/// Threshold policy with linear SNR backoff `λc(λ̂) = σ·ρ_eff·λ̂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearBackoffPolicy {
    pub sigma: f64,
    pub threshold_x: f64,
}

impl LinearBackoffPolicy {
    pub fn new(sigma: f64, threshold_x: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&sigma) {
            return Err(DosError::domain(format!("backoff ratio must lie in [0, 1], got {sigma}")));
        }
        if !(threshold_x >= 0.0) {
            return Err(DosError::domain(format!("threshold must be non-negative, got {threshold_x}")));
        }
        Ok(Self { sigma, threshold_x })
    }
}

/// One row of the backoff iteration: `x_k` and the ratio `σ` that produced it
/// (absent for the starting point).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Iterate {
    pub k: usize,
    pub x: f64,
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverTrace {
    pub iterates: Vec<Iterate>,
    pub converged: bool,
    pub sigma_star: f64,
    pub x_star: f64,
}

impl SolverTrace {
    /// Number of update steps taken (the starting point is not counted).
    pub fn iterations(&self) -> usize {
        self.iterates.len().saturating_sub(1)
    }

    pub fn policy(&self) -> LinearBackoffPolicy {
        LinearBackoffPolicy { sigma: self.sigma_star, threshold_x: self.x_star }
    }
}
