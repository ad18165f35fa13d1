//! Noisy-channel and contention model.
//!
//! A probe returns the normalized channel estimate `λ̂ ~ Exp(1)`. The SNR the
//! receiver actually sees is
//!
//! ```text
//! λ = ρ_eff·λ̂ / (1 + α·ρ_eff·z),   z ~ Exp(1) independent of λ̂
//! ```
//!
//! so `λ ≤ ρ_eff·λ̂` always, and transmitting at the estimated rate would
//! always be in outage. A backoff function nominates an SNR `λc(λ̂)` and the
//! packet succeeds only when `λc ≤ λ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DosError, Result};

/// How the effective SNR is derived from the nominal SNR `ρ` and the
/// estimation-error variance `β`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SnrConvention {
    /// `ρ_eff = (1 − β)·ρ`: `ρ` is the receiver SNR and the estimate carries
    /// only the `1 − β` share of the channel energy.
    #[default]
    Attenuated,
    /// `ρ_eff = ρ / (1 − β) = (1 + α)·ρ`: `ρ` is quoted after normalizing the
    /// estimate energy. The benchmark tables shipped with this crate
    /// (see [`crate::reproduce`]) are stated in this convention.
    Boosted,
}

impl SnrConvention {
    fn effective_snr(self, rho: f64, beta: f64) -> f64 {
        match self {
            SnrConvention::Attenuated => (1.0 - beta) * rho,
            SnrConvention::Boosted => rho / (1.0 - beta),
        }
    }
}

impl std::str::FromStr for SnrConvention {
    type Err = DosError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "attenuated" => Ok(SnrConvention::Attenuated),
            "boosted" => Ok(SnrConvention::Boosted),
            other => {
                Err(DosError::domain(format!("unknown SNR convention '{other}' (expected attenuated or boosted)")))
            }
        }
    }
}

/// Channel description: nominal SNR, estimation-error variance and the
/// quantities derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelParams {
    rho: f64,
    beta: f64,
    alpha: f64,
    rho_eff: f64,
    convention: SnrConvention,
}

impl ChannelParams {
    /// Receiver SNR `rho` with error variance `beta ∈ [0, 1)`.
    pub fn new(rho: f64, beta: f64) -> Result<Self> {
        Self::from_beta(rho, beta, SnrConvention::Attenuated)
    }

    /// Receiver SNR `rho` with normalized error variance `alpha = β/(1−β) ≥ 0`.
    pub fn with_alpha(rho: f64, alpha: f64) -> Result<Self> {
        Self::from_alpha(rho, alpha, SnrConvention::Attenuated)
    }

    /// Perfect channel state information (`β = α = 0`).
    pub fn perfect(rho: f64) -> Result<Self> {
        Self::new(rho, 0.0)
    }

    pub fn from_alpha(rho: f64, alpha: f64, convention: SnrConvention) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(DosError::domain(format!("alpha must be finite and non-negative, got {alpha}")));
        }
        Self::from_beta(rho, alpha / (1.0 + alpha), convention)
    }

    pub fn from_beta(rho: f64, beta: f64, convention: SnrConvention) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(DosError::domain(format!("rho must be finite and positive, got {rho}")));
        }
        if !(0.0..1.0).contains(&beta) {
            return Err(DosError::domain(format!("beta must lie in [0, 1), got {beta}")));
        }
        Ok(Self { rho, beta, alpha: beta / (1.0 - beta), rho_eff: convention.effective_snr(rho, beta), convention })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn rho_eff(&self) -> f64 {
        self.rho_eff
    }

    pub fn convention(&self) -> SnrConvention {
        self.convention
    }

    pub fn is_perfect(&self) -> bool {
        self.alpha == 0.0
    }

    pub(crate) fn require_noisy(&self) -> Result<()> {
        if self.alpha > 0.0 {
            Ok(())
        } else {
            Err(DosError::domain("operation needs a noisy channel (alpha > 0); use the perfect-CSI path"))
        }
    }
}

/// Random-access contention: per-link access probabilities and slot timing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContentionParams {
    /// Empty when the success probability was supplied directly.
    access_probs: Vec<f64>,
    tau: f64,
    t_data: f64,
    p_s: f64,
    delta: f64,
}

impl ContentionParams {
    pub fn new(access_probs: Vec<f64>, tau: f64, t_data: f64) -> Result<Self> {
        let p_s = contention_success_prob(&access_probs)?;
        Self::build(access_probs, p_s, tau, t_data)
    }

    /// `m` identical links, each contending with probability `p`.
    pub fn homogeneous(m: usize, p: f64, tau: f64, t_data: f64) -> Result<Self> {
        Self::new(vec![p; m], tau, t_data)
    }

    pub fn from_success_prob(p_s: f64, tau: f64, t_data: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_s) {
            return Err(DosError::domain(format!("success probability must lie in [0, 1], got {p_s}")));
        }
        Self::build(Vec::new(), p_s, tau, t_data)
    }

    /// Unit transmission time and mini-slot `delta`.
    pub fn with_delta(delta: f64, p_s: f64) -> Result<Self> {
        Self::from_success_prob(p_s, delta, 1.0)
    }

    fn build(access_probs: Vec<f64>, p_s: f64, tau: f64, t_data: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(DosError::domain(format!("mini-slot duration must be positive, got {tau}")));
        }
        if !(t_data > 0.0) || !t_data.is_finite() {
            return Err(DosError::domain(format!("transmission time must be positive, got {t_data}")));
        }
        Ok(Self { access_probs, tau, t_data, p_s, delta: tau / t_data })
    }

    pub fn access_probs(&self) -> &[f64] {
        &self.access_probs
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn t_data(&self) -> f64 {
        self.t_data
    }

    pub fn p_s(&self) -> f64 {
        self.p_s
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `δ / p_s`: expected contention time per successful round, in units of `T`.
    pub fn overhead(&self) -> f64 {
        self.delta / self.p_s
    }

    pub(crate) fn require_solvable(&self) -> Result<()> {
        if self.p_s > 0.0 {
            Ok(())
        } else {
            Err(DosError::domain("contention never succeeds (p_s = 0)"))
        }
    }
}

impl Default for ContentionParams {
    /// `δ = 0.1`, `p_s = e^{-1}`.
    fn default() -> Self {
        Self::with_delta(0.1, (-1f64).exp()).expect("default contention parameters are valid")
    }
}

/// Error variance after `tau_train` units of training: `β = 1/(ρ·τ + 1)`.
pub fn beta_from_training(rho: f64, tau_train: f64) -> Result<f64> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(DosError::domain(format!("rho must be finite and positive, got {rho}")));
    }
    if !(tau_train > 0.0) {
        return Err(DosError::domain(format!("training time must be positive, got {tau_train}")));
    }
    Ok(1.0 / (rho * tau_train + 1.0))
}

/// Probability that exactly one link transmits: `Σ_m p_m Π_{i≠m} (1 − p_i)`.
pub fn contention_success_prob(access_probs: &[f64]) -> Result<f64> {
    if access_probs.is_empty() {
        return Err(DosError::domain("at least one link is required"));
    }
    if let Some(p) = access_probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(DosError::domain(format!("access probability {p} outside [0, 1]")));
    }
    // prefix[m] = Π_{i<m} (1 − p_i); walking back with a suffix product avoids division
    let n = access_probs.len();
    let mut prefix = vec![1.0; n + 1];
    for (m, p) in access_probs.iter().enumerate() {
        prefix[m + 1] = prefix[m] * (1.0 - p);
    }
    let mut suffix = 1.0;
    let mut total = 0.0;
    for m in (0..n).rev() {
        total += access_probs[m] * prefix[m] * suffix;
        suffix *= 1.0 - access_probs[m];
    }
    Ok(total)
}

/// `P(λ ≥ λc | λ̂) = max(0, 1 − exp{−(λ̂/λc − 1/ρ_eff)/α})`.
pub fn success_prob_given_estimate(lambda_c: f64, lambda_hat: f64, ch: &ChannelParams) -> Result<f64> {
    ch.require_noisy()?;
    if !(lambda_c > 0.0) {
        return Err(DosError::domain(format!("nominated SNR must be positive, got {lambda_c}")));
    }
    if !(lambda_hat >= 0.0) {
        return Err(DosError::domain(format!("estimate must be non-negative, got {lambda_hat}")));
    }
    Ok(success_factor(lambda_c, lambda_hat, ch))
}

#[inline]
pub(crate) fn success_factor(lambda_c: f64, lambda_hat: f64, ch: &ChannelParams) -> f64 {
    let exponent = -(lambda_hat / lambda_c - 1.0 / ch.rho_eff) / ch.alpha;
    (-exponent.exp_m1()).max(0.0)
}

/// Density of the actual SNR `λ` given the estimate `λ̂`.
pub fn conditional_snr_density(lambda: f64, lambda_hat: f64, ch: &ChannelParams) -> Result<f64> {
    ch.require_noisy()?;
    if !(lambda > 0.0) || !(lambda_hat > 0.0) {
        return Err(DosError::domain(format!(
            "density needs positive lambda and estimate, got ({lambda}, {lambda_hat})"
        )));
    }
    let gap = lambda_hat / lambda - 1.0 / ch.rho_eff;
    if gap < 0.0 {
        return Ok(0.0);
    }
    Ok(lambda_hat / (ch.alpha * lambda * lambda) * (-gap / ch.alpha).exp())
}

/// Conditional expected rate `R̄ = log(1 + λc)·P(λ ≥ λc | λ̂)`, zero at `λc = 0`.
pub fn expected_rate_bar(lambda_hat: f64, lambda_c: f64, ch: &ChannelParams) -> Result<f64> {
    ch.require_noisy()?;
    if !(lambda_c >= 0.0) {
        return Err(DosError::domain(format!("nominated SNR must be non-negative, got {lambda_c}")));
    }
    if !(lambda_hat >= 0.0) {
        return Err(DosError::domain(format!("estimate must be non-negative, got {lambda_hat}")));
    }
    Ok(rate_bar(lambda_hat, lambda_c, ch))
}

#[inline]
pub(crate) fn rate_bar(lambda_hat: f64, lambda_c: f64, ch: &ChannelParams) -> f64 {
    if lambda_c == 0.0 {
        return 0.0;
    }
    lambda_c.ln_1p() * success_factor(lambda_c, lambda_hat, ch)
}

/// SNR realized by the channel for estimate `λ̂` and normalized error `z`.
#[inline]
pub fn actual_snr(lambda_hat: f64, z: f64, ch: &ChannelParams) -> f64 {
    ch.rho_eff * lambda_hat / (1.0 + ch.alpha * ch.rho_eff * z)
}

/// Seeded random stream. Streams with the same `(seed, stream_id)` replay the
/// same draws; distinct `stream_id`s select disjoint ChaCha8 streams.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform on `(0, 1]`.
    #[inline]
    fn uniform_open0(&mut self) -> f64 {
        1.0 - self.rng.random::<f64>()
    }

    #[inline]
    fn unit_exponential(&mut self) -> f64 {
        -self.uniform_open0().ln()
    }

    /// Normalized channel estimate `λ̂ ~ Exp(1)`.
    #[inline]
    pub fn sample_estimate(&mut self) -> f64 {
        self.unit_exponential()
    }

    /// Normalized estimation error `z ~ Exp(1)`.
    #[inline]
    pub fn sample_error(&mut self) -> f64 {
        self.unit_exponential()
    }

    /// Contention rounds until one link succeeds, `K ~ Geometric(p_s)` on `{1, 2, ...}`.
    pub fn sample_contention(&mut self, p_s: f64) -> Result<u64> {
        if !(p_s > 0.0 && p_s <= 1.0) {
            return Err(DosError::domain(format!("success probability must lie in (0, 1], got {p_s}")));
        }
        Ok(self.geometric(p_s))
    }

    #[inline]
    pub(crate) fn geometric(&mut self, p_s: f64) -> u64 {
        if p_s >= 1.0 {
            return 1;
        }
        let u = self.uniform_open0();
        (u.ln() / (-p_s).ln_1p()).ceil().max(1.0) as u64
    }
}
