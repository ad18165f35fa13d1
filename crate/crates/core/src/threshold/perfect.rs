use crate::channel::ContentionParams;
use crate::error::{DosError, Result};
use crate::specfun::{find_root, scaled_e1_unchecked, Tolerance};

const MAX_DOUBLINGS: usize = 60;

/// Optimal throughput with perfect CSI: the root of
/// `x = e^{1/ρ}·E1(e^x/ρ)·p_s/δ`.
pub fn solve_perfect_csi(rho: f64, delta: f64, p_s: f64) -> Result<f64> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(DosError::domain(format!("rho must be finite and positive, got {rho}")));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(DosError::domain(format!("delta must be finite and positive, got {delta}")));
    }
    if !(p_s > 0.0 && p_s <= 1.0) {
        return Err(DosError::domain(format!("success probability must lie in (0, 1], got {p_s}")));
    }
    let gain = p_s / delta;
    // e^{1/ρ} E1(e^x/ρ) = exp(-(e^x - 1)/ρ) · scaled_e1(e^x/ρ)
    let g = |x: f64| {
        let arg = x.exp() / rho;
        (-x.exp_m1() / rho).exp() * scaled_e1_unchecked(arg) * gain - x
    };

    let mut hi = 1.0;
    let mut doublings = 0;
    while g(hi) >= 0.0 {
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(DosError::Solver(format!("could not bracket the perfect-CSI fixed point below {hi}")));
        }
        hi *= 2.0;
    }
    find_root(g, 0.0, hi, &Tolerance::default())
}

/// Estimate-domain threshold under perfect CSI: `ln(1 + ρ λ') = x`.
pub fn perfect_lambda_prime(x: f64, rho: f64) -> f64 {
    x.exp_m1() / rho
}

/// Numerator and denominator of the perfect-CSI rate-of-return map at threshold `x`.
pub(crate) fn perfect_uv(x: f64, rho: f64, cont: &ContentionParams) -> (f64, f64) {
    let lp = perfect_lambda_prime(x, rho);
    if !lp.is_finite() {
        return (0.0, cont.overhead());
    }
    let tail = (-lp).exp();
    let u = tail * (x + scaled_e1_unchecked(lp + 1.0 / rho));
    (u, cont.overhead() + tail)
}

/// `E[R·1{R ≥ x}] / (δ/p_s + P(R ≥ x))` for `R = ln(1 + ρ·λ̂)`.
pub fn phi_perfect(x: f64, rho: f64, cont: &ContentionParams) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(DosError::domain(format!("threshold must be non-negative, got {x}")));
    }
    if !(rho > 0.0) {
        return Err(DosError::domain(format!("rho must be positive, got {rho}")));
    }
    cont.require_solvable()?;
    let (u, v) = perfect_uv(x, rho, cont);
    Ok(u / v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e() -> f64 {
        (-1f64).exp()
    }

    #[test]
    fn tabulated_perfect_csi_values() {
        assert!((solve_perfect_csi(1.0, 0.1, e()).unwrap() - 0.610).abs() <= 1e-3);
        assert!((solve_perfect_csi(0.5, 0.1, e()).unwrap() - 0.384).abs() <= 1e-3);
    }

    #[test]
    fn vanishing_snr() {
        let x = solve_perfect_csi(1e-6, 0.1, e()).unwrap();
        assert!(x < 1e-4, "{x}");
    }

    #[test]
    fn fixed_point_of_phi() {
        let cont = ContentionParams::default();
        for rho in [0.2, 1.0, 7.0, 300.0] {
            let x = solve_perfect_csi(rho, cont.delta(), cont.p_s()).unwrap();
            let phi = phi_perfect(x, rho, &cont).unwrap();
            assert!((phi - x).abs() < 1e-9, "rho {rho}: {phi} vs {x}");
        }
    }

    #[test]
    fn domain_errors() {
        assert!(solve_perfect_csi(0.0, 0.1, 0.3).is_err());
        assert!(solve_perfect_csi(1.0, 0.0, 0.3).is_err());
        assert!(solve_perfect_csi(1.0, 0.1, 0.0).is_err());
        assert!(solve_perfect_csi(1.0, 0.1, 1.1).is_err());
    }
}
