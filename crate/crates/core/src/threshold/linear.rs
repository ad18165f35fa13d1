//! Closed forms for the linear backoff `λc(λ̂) = σ·ρ_eff·λ̂`.
//!
//! With a linear backoff the success probability no longer depends on the
//! estimate: `c(σ) = 1 − exp{−(1/σ − 1)/(α ρ_eff)}`. The threshold rule
//! `R̄(λ̂') = x` then inverts to `λ̂' = (e^{x/c} − 1)/(σ ρ_eff)` and the integral
//! reduces to an exponential integral.

use crate::channel::{ChannelParams, ContentionParams};
use crate::error::{DosError, Result};
use crate::specfun::{find_root, scaled_e1_unchecked, Tolerance};

const MAX_DOUBLINGS: usize = 60;

/// Outage-free probability `c(σ)` of the linear backoff; zero at `σ = 1`.
pub(crate) fn success_constant(sigma: f64, ch: &ChannelParams) -> f64 {
    -(-(1.0 / sigma - 1.0) / (ch.alpha() * ch.rho_eff())).exp_m1()
}

fn lambda_prime_unchecked(x: f64, sigma: f64, ch: &ChannelParams) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let c = success_constant(sigma, ch);
    if c <= 0.0 {
        return f64::INFINITY;
    }
    // overflow of e^{x/c} yields +inf, which is the sentinel we want
    (x / c).exp_m1() / (sigma * ch.rho_eff())
}

/// Estimate-domain threshold `λ̂'` for the linear backoff; `+∞` when no
/// estimate can reach `x` (e.g. `σ = 1`, where every transmission is in outage).
pub fn lambda_hat_prime_linear(x: f64, sigma: f64, ch: &ChannelParams) -> Result<f64> {
    ch.require_noisy()?;
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(DosError::domain(format!("backoff ratio must lie in (0, 1], got {sigma}")));
    }
    if !(x >= 0.0) {
        return Err(DosError::domain(format!("threshold must be non-negative, got {x}")));
    }
    Ok(lambda_prime_unchecked(x, sigma, ch))
}

/// `(U, V)` with `Φ = U/V`. Endpoint ratios `σ ∈ {0, 1}` give `U = 0`.
pub(crate) fn linear_uv(x: f64, sigma: f64, ch: &ChannelParams, cont: &ContentionParams) -> (f64, f64) {
    let overhead = cont.overhead();
    if sigma <= 0.0 || sigma >= 1.0 {
        let v = if x == 0.0 { overhead + 1.0 } else { overhead };
        return (0.0, v);
    }
    let lp = lambda_prime_unchecked(x, sigma, ch);
    if !lp.is_finite() {
        return (0.0, overhead);
    }
    let c = success_constant(sigma, ch);
    let snr_scale = sigma * ch.rho_eff();
    let tail = (-lp).exp();
    let u = c * tail * ((snr_scale * lp).ln_1p() + scaled_e1_unchecked(lp + 1.0 / snr_scale));
    (u, overhead + tail)
}

fn check_inputs(x: f64, sigma: f64, ch: &ChannelParams, cont: &ContentionParams) -> Result<()> {
    ch.require_noisy()?;
    cont.require_solvable()?;
    if !(x >= 0.0) {
        return Err(DosError::domain(format!("threshold must be non-negative, got {x}")));
    }
    if !(0.0..=1.0).contains(&sigma) {
        return Err(DosError::domain(format!("backoff ratio must lie in [0, 1], got {sigma}")));
    }
    Ok(())
}

/// `Φ(x, σ)` for the linear backoff, evaluated overflow-safely.
pub fn phi_linear(x: f64, sigma: f64, ch: &ChannelParams, cont: &ContentionParams) -> Result<f64> {
    check_inputs(x, sigma, ch, cont)?;
    let (u, v) = linear_uv(x, sigma, ch, cont);
    Ok(u / v)
}

/// Numerator of `Φ(x, σ)`; see [`phi_linear`].
pub fn dinkelbach_u(sigma: f64, x: f64, ch: &ChannelParams, cont: &ContentionParams) -> Result<f64> {
    lambda_hat_prime_linear(x, sigma, ch)?;
    check_inputs(x, sigma, ch, cont)?;
    Ok(linear_uv(x, sigma, ch, cont).0)
}

/// Denominator of `Φ(x, σ)`: `δ/p_s + e^{−λ̂'}`.
pub fn dinkelbach_v(sigma: f64, x: f64, ch: &ChannelParams, cont: &ContentionParams) -> Result<f64> {
    lambda_hat_prime_linear(x, sigma, ch)?;
    check_inputs(x, sigma, ch, cont)?;
    Ok(linear_uv(x, sigma, ch, cont).1)
}

/// Optimal threshold `x*(σ)` for a fixed backoff ratio.
pub fn solve_fixed_point_linear(
    sigma: f64,
    ch: &ChannelParams,
    cont: &ContentionParams,
    tol: &Tolerance,
) -> Result<f64> {
    check_inputs(0.0, sigma, ch, cont)?;
    let g = |x: f64| {
        let (u, v) = linear_uv(x, sigma, ch, cont);
        u / v - x
    };
    let at_zero = g(0.0);
    if at_zero <= 0.0 {
        return Ok(0.0);
    }
    let mut hi = at_zero + 1.0;
    let mut doublings = 0;
    while g(hi) >= 0.0 {
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(DosError::Solver(format!("could not bracket the fixed point for sigma = {sigma}")));
        }
        hi *= 2.0;
    }
    find_root(g, 0.0, hi, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{expected_rate_bar, SnrConvention};

    fn tabulated(rho: f64, alpha: f64) -> ChannelParams {
        ChannelParams::from_alpha(rho, alpha, SnrConvention::Boosted).unwrap()
    }

    #[test]
    fn threshold_estimate_edges() {
        let ch = ChannelParams::with_alpha(1.0, 1.0).unwrap();
        assert_eq!(lambda_hat_prime_linear(0.0, 0.4, &ch).unwrap(), 0.0);
        assert_eq!(lambda_hat_prime_linear(0.3, 1.0, &ch).unwrap(), f64::INFINITY);
        assert_eq!(lambda_hat_prime_linear(1e6, 0.5, &ch).unwrap(), f64::INFINITY);
        assert!(lambda_hat_prime_linear(0.3, 0.0, &ch).is_err());
        assert!(lambda_hat_prime_linear(0.3, 1.2, &ch).is_err());
        assert!(lambda_hat_prime_linear(0.3, 0.5, &ChannelParams::perfect(1.0).unwrap()).is_err());
    }

    #[test]
    fn threshold_estimate_matches_rate_inversion() {
        // oracle: bisection on R̄(λ̂) = x with λc = σ ρ_eff λ̂
        let ch = ChannelParams::with_alpha(1.0, 1.0).unwrap();
        let (sigma, x) = (0.285, 0.301);
        let oracle = find_root(
            |lh| expected_rate_bar(lh, sigma * ch.rho_eff() * lh, &ch).unwrap() - x,
            0.0,
            50.0,
            &Tolerance::new(1e-13, 1e-15, 500).unwrap(),
        )
        .unwrap();
        let lp = lambda_hat_prime_linear(x, sigma, &ch).unwrap();
        assert!((lp - oracle).abs() < 1e-9, "{lp} vs {oracle}");
        assert!((lp - 2.484).abs() < 1e-3);
    }

    #[test]
    fn boundary_ratios_are_null() {
        let cont = ContentionParams::default();
        for ch in [tabulated(1.0, 1.0), tabulated(10.0, 0.1), ChannelParams::with_alpha(0.5, 5.0).unwrap()] {
            for x in [0.0, 0.1, 0.7, 3.0] {
                assert_eq!(phi_linear(x, 0.0, &ch, &cont).unwrap(), 0.0);
                assert_eq!(phi_linear(x, 1.0, &ch, &cont).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn tabulated_fixed_points() {
        let cont = ContentionParams::default();
        let tol = Tolerance::default();
        let x = solve_fixed_point_linear(0.285, &tabulated(1.0, 1.0), &cont, &tol).unwrap();
        assert!((x - 0.301).abs() <= 2e-3, "{x}");
        let x = solve_fixed_point_linear(0.049, &tabulated(10.0, 1.0), &cont, &tol).unwrap();
        assert!((x - 0.374).abs() <= 2e-3, "{x}");
        let phi = phi_linear(0.301, 0.285, &tabulated(1.0, 1.0), &cont).unwrap();
        assert!((phi - 0.301).abs() <= 2e-3);
    }

    #[test]
    fn vanishing_ratio() {
        let cont = ContentionParams::default();
        let x = solve_fixed_point_linear(1e-6, &tabulated(1.0, 1.0), &cont, &Tolerance::default()).unwrap();
        assert!(x < 1e-4, "{x}");
        assert_eq!(solve_fixed_point_linear(0.0, &tabulated(1.0, 1.0), &cont, &Tolerance::default()).unwrap(), 0.0);
    }

    #[test]
    fn u_over_v_is_phi() {
        let cont = ContentionParams::default();
        let ch = tabulated(2.0, 0.5);
        for (s, x) in [(0.1, 0.2), (0.5, 0.0), (0.8, 0.4), (0.33, 1.5)] {
            let u = dinkelbach_u(s, x, &ch, &cont).unwrap();
            let v = dinkelbach_v(s, x, &ch, &cont).unwrap();
            assert!(v >= cont.overhead());
            let phi = phi_linear(x, s, &ch, &cont).unwrap();
            assert!((u / v - phi).abs() <= 1e-14 * phi.abs().max(1e-300));
        }
    }

    #[test]
    fn huge_snr_stays_finite() {
        let cont = ContentionParams::default();
        let ch = ChannelParams::with_alpha(1e6, 1e-3).unwrap();
        for s in [1e-4, 0.01, 0.5, 0.9999] {
            let phi = phi_linear(0.5, s, &ch, &cont).unwrap();
            assert!(phi.is_finite() && phi >= 0.0);
        }
    }
}
