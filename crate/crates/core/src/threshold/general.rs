//! Threshold and rate-of-return map for arbitrary backoff functions.
//!
//! Nothing here uses the linear closed forms: `λ̂'` comes from bisection on
//! `R̄(λ̂) = x` and the integral from adaptive quadrature of
//! `e^{−t}·R̄(λ̂' + t)` over `t ∈ [0, 48]`. `R̄` grows only logarithmically, so
//! the dropped tail is below `e^{−48}` relative to the integral.

use std::fmt;
use std::sync::Arc;

use crate::channel::{rate_bar, ChannelParams, ContentionParams};
use crate::error::{DosError, Result};
use crate::specfun::{find_root, integrate, Tolerance};

pub type BackoffFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Estimates above this have probability `e^{-λ̂}` below the smallest subnormal.
const ESTIMATE_CEILING: f64 = 746.0;
const MONOTONE_GRID_MAX: f64 = 50.0;
const MONOTONE_GRID_POINTS: usize = 2001;
const TAIL_CUTOFF: f64 = 48.0;

/// Threshold policy with a caller-supplied nominated-SNR function `λc(λ̂)`.
#[derive(Clone)]
pub struct GeneralBackoffPolicy {
    lambda_c: BackoffFn,
    pub threshold_x: f64,
}

impl fmt::Debug for GeneralBackoffPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneralBackoffPolicy").field("threshold_x", &self.threshold_x).finish_non_exhaustive()
    }
}

impl GeneralBackoffPolicy {
    /// Wraps `lambda_c` after checking, on a grid over `[0, 50]`, that it is
    /// non-negative and that the induced `R̄` is nondecreasing on `ch`.
    pub fn new<F>(lambda_c: F, threshold_x: f64, ch: &ChannelParams) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ch.require_noisy()?;
        if !(threshold_x >= 0.0) {
            return Err(DosError::domain(format!("threshold must be non-negative, got {threshold_x}")));
        }
        let policy = Self { lambda_c: Arc::new(lambda_c), threshold_x };
        let step = MONOTONE_GRID_MAX / (MONOTONE_GRID_POINTS - 1) as f64;
        let mut prev = f64::NEG_INFINITY;
        for i in 0..MONOTONE_GRID_POINTS {
            let lh = step * i as f64;
            let lc = policy.nominated_snr(lh);
            if !(lc >= 0.0) || !lc.is_finite() {
                return Err(DosError::Policy(format!("nominated SNR at estimate {lh} is {lc}")));
            }
            let r = rate_bar(lh, lc, ch);
            if r < prev - 1e-12 * (1.0 + prev.abs()) {
                return Err(DosError::Policy(format!("expected rate decreases from {prev} to {r} near estimate {lh}")));
            }
            prev = prev.max(r);
        }
        Ok(policy)
    }

    /// Linear backoff expressed as a general policy.
    pub fn linear(sigma: f64, threshold_x: f64, ch: &ChannelParams) -> Result<Self> {
        if !(0.0..=1.0).contains(&sigma) {
            return Err(DosError::domain(format!("backoff ratio must lie in [0, 1], got {sigma}")));
        }
        let scale = sigma * ch.rho_eff();
        Self::new(move |lh| scale * lh, threshold_x, ch)
    }

    #[inline]
    pub fn nominated_snr(&self, lambda_hat: f64) -> f64 {
        (self.lambda_c)(lambda_hat)
    }

    #[inline]
    pub fn rate_bar(&self, lambda_hat: f64, ch: &ChannelParams) -> f64 {
        rate_bar(lambda_hat, self.nominated_snr(lambda_hat), ch)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiGeneralOptions {
    /// Absolute and relative tolerances on the integral.
    pub quad_abs_tol: f64,
    pub quad_rel_tol: f64,
    pub max_panels: usize,
    /// Root-finding tolerance for `λ̂'`.
    pub root_tol: Tolerance,
}

impl Default for PhiGeneralOptions {
    fn default() -> Self {
        Self {
            quad_abs_tol: 1e-14,
            quad_rel_tol: 1e-12,
            max_panels: 20_000,
            root_tol: Tolerance { abs_tol: 1e-13, rel_tol: 1e-15, max_iter: 500 },
        }
    }
}

/// Smallest estimate whose expected rate reaches `x`, or `None` if `R̄`
/// stays below `x` everywhere that matters.
pub fn threshold_estimate_general(
    x: f64,
    policy: &GeneralBackoffPolicy,
    ch: &ChannelParams,
    tol: &Tolerance,
) -> Result<Option<f64>> {
    let r = |lh: f64| policy.rate_bar(lh, ch);
    let at_zero = r(0.0);
    if at_zero >= x {
        return Ok(Some(0.0));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut prev = at_zero;
    loop {
        let value = r(hi);
        if value < prev - 1e-12 * (1.0 + prev.abs()) {
            return Err(DosError::Policy(format!(
                "expected rate decreases between estimates {lo} and {hi} ({prev} -> {value})"
            )));
        }
        if value >= x {
            break;
        }
        if hi >= ESTIMATE_CEILING {
            return Ok(None);
        }
        prev = value;
        lo = hi;
        hi = (2.0 * hi).min(ESTIMATE_CEILING);
    }
    find_root(|lh| r(lh) - x, lo, hi, tol).map(Some)
}

/// `Φ(x, λc)` for an arbitrary nondecreasing policy.
pub fn phi_general(x: f64, policy: &GeneralBackoffPolicy, ch: &ChannelParams, cont: &ContentionParams) -> Result<f64> {
    phi_general_with(x, policy, ch, cont, &PhiGeneralOptions::default())
}

pub fn phi_general_with(
    x: f64,
    policy: &GeneralBackoffPolicy,
    ch: &ChannelParams,
    cont: &ContentionParams,
    opts: &PhiGeneralOptions,
) -> Result<f64> {
    ch.require_noisy()?;
    cont.require_solvable()?;
    if !(x >= 0.0) {
        return Err(DosError::domain(format!("threshold must be non-negative, got {x}")));
    }
    let Some(lp) = threshold_estimate_general(x, policy, ch, &opts.root_tol)? else {
        return Ok(0.0);
    };
    let upper = (-lp).exp();
    if upper == 0.0 {
        return Ok(0.0);
    }
    let integrand = |t: f64| (-t).exp() * policy.rate_bar(lp + t, ch);
    let shifted = integrate(integrand, 0.0, TAIL_CUTOFF, opts.quad_abs_tol, opts.quad_rel_tol, opts.max_panels)?;
    Ok(upper * shifted / (cont.overhead() + upper))
}

/// Fixed point `x = Φ(x, λc)` for an arbitrary policy, by bisection.
pub fn solve_fixed_point_general(
    policy: &GeneralBackoffPolicy,
    ch: &ChannelParams,
    cont: &ContentionParams,
    tol: &Tolerance,
) -> Result<f64> {
    let opts = PhiGeneralOptions::default();
    let at_zero = phi_general_with(0.0, policy, ch, cont, &opts)?;
    if at_zero <= 0.0 {
        return Ok(0.0);
    }
    let mut failure = None;
    let mut g = |x: f64| match phi_general_with(x, policy, ch, cont, &opts) {
        Ok(phi) => phi - x,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let mut hi = at_zero + 1.0;
    for _ in 0..60 {
        let v = g(hi);
        if v.is_nan() || v < 0.0 {
            break;
        }
        hi *= 2.0;
    }
    let root = find_root(&mut g, 0.0, hi, tol);
    match failure {
        Some(e) => Err(e),
        None => root,
    }
}
