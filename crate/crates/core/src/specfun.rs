//! Special functions and one-dimensional numerical routines.
//!
//! Everything here is a pure function of its arguments. The exponential
//! integral comes in two flavours: [`exp_integral_e1`] and the overflow-safe
//! [`scaled_e1`] (`e^x · E1(x)`), which the throughput formulas need whenever
//! a large `exp(1/(σ ρ_eff))` prefactor multiplies a tiny `E1` tail.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{DosError, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Above this argument `e^x E1(x)` is evaluated from its asymptotic series.
const ASYMPTOTIC_CUTOFF: f64 = 1e8;

const CF_MAX_ITER: usize = 10_000;

/// Default number of grid points scanned by [`maximize_1d`].
pub const DEFAULT_GRID_POINTS: usize = 1024;

/// Stopping criteria shared by the iterative routines.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, max_iter: usize) -> Result<Self> {
        if !(abs_tol > 0.0) || !abs_tol.is_finite() {
            return Err(DosError::domain(format!("abs_tol must be positive, got {abs_tol}")));
        }
        if !(rel_tol > 0.0) || !rel_tol.is_finite() {
            return Err(DosError::domain(format!("rel_tol must be positive, got {rel_tol}")));
        }
        if max_iter == 0 {
            return Err(DosError::domain("max_iter must be at least 1"));
        }
        Ok(Self { abs_tol, rel_tol, max_iter })
    }

    fn converged(&self, width: f64, at: f64) -> bool {
        width <= self.abs_tol + self.rel_tol * at.abs()
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-10, max_iter: 200 }
    }
}

fn check_positive(x: f64) -> Result<()> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(DosError::domain(format!("exponential integral needs x > 0, got {x}")))
    }
}

/// Power series `-γ - ln x + Σ (-1)^{k+1} x^k / (k·k!)`, used for `x ≤ 1`.
fn e1_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        let k = k as f64;
        term *= -x / k;
        let contrib = -term / k;
        sum += contrib;
        if contrib.abs() <= f64::EPSILON * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - x.ln() + sum
}

/// Continued fraction for `e^x E1(x)`, evaluated with the modified Lentz method.
fn e1_continued_fraction_scaled(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=CF_MAX_ITER {
        let i = i as f64;
        let an = -i * i;
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() <= f64::EPSILON {
            break;
        }
    }
    h
}

fn e1_asymptotic_scaled(x: f64) -> f64 {
    let inv = 1.0 / x;
    inv * (1.0 - inv * (1.0 - 2.0 * inv * (1.0 - 3.0 * inv)))
}

/// `E1(x) = ∫_x^∞ e^{-t}/t dt` for `x > 0`.
///
/// Underflows to exactly `0.0` once `e^{-x}` is below the smallest subnormal
/// (roughly `x > 745`).
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    check_positive(x)?;
    if x <= 1.0 {
        Ok(e1_series(x))
    } else {
        Ok(scaled_e1_unchecked(x) * (-x).exp())
    }
}

/// `e^x · E1(x)` for `x > 0`, finite for every representable argument.
pub fn scaled_e1(x: f64) -> Result<f64> {
    check_positive(x)?;
    Ok(scaled_e1_unchecked(x))
}

pub(crate) fn scaled_e1_unchecked(x: f64) -> f64 {
    if x <= 1.0 {
        e1_series(x) * x.exp()
    } else if x < ASYMPTOTIC_CUTOFF {
        e1_continued_fraction_scaled(x)
    } else {
        e1_asymptotic_scaled(x)
    }
}

/// Bisection root finder on a sign-changing bracket.
///
/// The bracket may be given in either order. Terminates when the bracket is
/// narrower than `abs_tol + rel_tol·|mid|`, on an exact zero, or when the
/// midpoint can no longer be split in floating point.
pub fn find_root<F>(mut f: F, lo: f64, hi: f64, tol: &Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if !f_lo.is_finite() {
        return Err(DosError::Evaluation { at: lo, value: f_lo });
    }
    if !f_hi.is_finite() {
        return Err(DosError::Evaluation { at: hi, value: f_hi });
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(DosError::Bracket { lo, hi, f_lo, f_hi });
    }

    for _ in 0..tol.max_iter {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if !f_mid.is_finite() {
            return Err(DosError::Evaluation { at: mid, value: f_mid });
        }
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if tol.converged(hi - lo, 0.5 * (lo + hi)) {
            return Ok(lo + 0.5 * (hi - lo));
        }
    }
    Err(DosError::Convergence { iterations: tol.max_iter, best: lo + 0.5 * (hi - lo) })
}

/// Global maximum of `f` on `[lo, hi]`: dense grid scan, then golden-section
/// refinement inside the cell pair around the best grid point.
///
/// Returns `(argmax, max)`.
pub fn maximize_1d<F>(f: F, lo: f64, hi: f64, tol: &Tolerance) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    maximize_1d_with_grid(f, lo, hi, tol, DEFAULT_GRID_POINTS)
}

pub fn maximize_1d_with_grid<F>(mut f: F, lo: f64, hi: f64, tol: &Tolerance, grid_points: usize) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(DosError::domain(format!("maximize_1d needs a finite interval lo < hi, got [{lo}, {hi}]")));
    }
    if grid_points < 3 {
        return Err(DosError::domain("maximize_1d needs at least 3 grid points"));
    }

    let step = (hi - lo) / (grid_points - 1) as f64;
    let node = |i: usize| if i == grid_points - 1 { hi } else { lo + step * i as f64 };

    let mut best_idx = 0;
    let mut best_val = f64::NEG_INFINITY;
    for i in 0..grid_points {
        let x = node(i);
        let v = f(x);
        if !v.is_finite() {
            return Err(DosError::Evaluation { at: x, value: v });
        }
        if v > best_val {
            best_val = v;
            best_idx = i;
        }
    }

    let mut a = node(best_idx.saturating_sub(1));
    let mut b = node((best_idx + 1).min(grid_points - 1));
    let mut best = (node(best_idx), best_val);

    // golden-section on [a, b]
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..tol.max_iter {
        if !(b - a > tol.abs_tol) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v.is_finite() && v > best.1 {
            best = (x, v);
        }
    }
    Ok(best)
}

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const K15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G7_WEIGHTS: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = 0.0;
    let mut gauss = 0.0;
    for (i, (&node, &wk)) in GK_NODES.iter().zip(K15_WEIGHTS.iter()).enumerate() {
        let pair = if node == 0.0 {
            f(center)
        } else {
            let dx = half * node;
            f(center - dx) + f(center + dx)
        };
        if !pair.is_finite() {
            return Err(DosError::Evaluation { at: center, value: pair });
        }
        kronrod += wk * pair;
        if i % 2 == 1 {
            gauss += G7_WEIGHTS[i / 2] * pair;
        }
    }
    Ok(Panel { a, b, value: kronrod * half, error: ((kronrod - gauss) * half).abs() })
}

/// Globally adaptive Gauss-Kronrod (7/15) quadrature of `f` over `[a, b]`.
///
/// Bisects the panel with the largest error estimate until the summed
/// estimate drops below `max(abs_tol, rel_tol·|integral|)`; fails once
/// `max_panels` panels are in use.
pub fn integrate<F>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64, max_panels: usize) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(DosError::domain(format!("integration interval [{a}, {b}] is not finite and ordered")));
    }
    let mut heap = BinaryHeap::new();
    let first = gauss_kronrod(&mut f, a, b)?;
    let mut error = first.error;
    let mut total = first.value;
    heap.push(first);

    while error > abs_tol.max(rel_tol * total.abs()) {
        if heap.len() >= max_panels {
            return Err(DosError::Solver(format!(
                "quadrature did not reach tolerance with {max_panels} panels (error estimate {error:e})"
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval can no longer be split; accept what we have
            heap.push(worst);
            break;
        }
        let left = gauss_kronrod(&mut f, worst.a, mid)?;
        let right = gauss_kronrod(&mut f, mid, worst.b)?;
        error += left.error + right.error - worst.error;
        total += left.value + right.value - worst.value;
        heap.push(left);
        heap.push(right);
    }
    Ok(heap.iter().map(|p| p.value).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn e1_frozen_values() {
        assert!(close(exp_integral_e1(1.0).unwrap(), 0.219_383_934_395_520_3, 1e-12));
        assert!(close(exp_integral_e1(0.5).unwrap(), 0.559_773_594_776_160_8, 1e-12));
        assert!(close(scaled_e1(1.0).unwrap(), 0.596_347_362_323_194_1, 1e-12));
        assert!(close(scaled_e1(0.5).unwrap(), 0.922_910_632_483_730_5, 1e-12));
    }

    #[test]
    fn e1_rejects_nonpositive() {
        assert!(matches!(exp_integral_e1(0.0), Err(DosError::Domain(_))));
        assert!(matches!(exp_integral_e1(-1.0), Err(DosError::Domain(_))));
        assert!(matches!(scaled_e1(-0.5), Err(DosError::Domain(_))));
        assert!(exp_integral_e1(f64::NAN).is_err());
    }

    #[test]
    fn e1_underflows_to_zero() {
        assert_eq!(exp_integral_e1(800.0).unwrap(), 0.0);
        assert!(scaled_e1(800.0).unwrap() > 0.0);
    }

    #[test]
    fn scaled_e1_asymptote() {
        let x = 1e6;
        assert!(close(scaled_e1(x).unwrap() * x, 1.0, 1e-5));
        assert!(scaled_e1(f64::MAX).unwrap().is_finite());
        assert!(scaled_e1(1e300).unwrap() > 0.0);
    }

    #[test]
    fn scaled_consistent_at_branch_point() {
        let below = scaled_e1(1.0).unwrap();
        let above = scaled_e1(1.0 + 1e-12).unwrap();
        assert!(close(below, above, 1e-10));
        let x = ASYMPTOTIC_CUTOFF;
        assert!(close(e1_continued_fraction_scaled(x), e1_asymptotic_scaled(x), 1e-14));
    }

    #[test]
    fn root_linear() {
        let r = find_root(|x| x - 2.0, 0.0, 5.0, &Tolerance::default()).unwrap();
        assert!((r - 2.0).abs() <= 1e-10);
    }

    #[test]
    fn root_inverts_e1() {
        let r = find_root(|x| exp_integral_e1(x).unwrap() - 0.219_383_934_4, 0.5, 2.0, &Tolerance::default()).unwrap();
        assert!((r - 1.0).abs() < 1e-8, "{r}");
    }

    #[test]
    fn root_errors() {
        let tol = Tolerance::default();
        assert!(matches!(find_root(|x| x * x + 1.0, -1.0, 1.0, &tol), Err(DosError::Bracket { .. })));
        let tight = Tolerance::new(1e-300, 1e-300, 5).unwrap();
        match find_root(|x| x - 0.3, 0.0, 1.0, &tight) {
            Err(DosError::Convergence { iterations, best }) => {
                assert_eq!(iterations, 5);
                assert!((best - 0.3).abs() < 0.05);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn root_order_and_determinism() {
        let tol = Tolerance::default();
        let f = |x: f64| x.powi(3) - 0.7 * x - 0.1;
        let a = find_root(f, 0.0, 2.0, &tol).unwrap();
        let b = find_root(f, 2.0, 0.0, &tol).unwrap();
        let c = find_root(f, 0.0, 2.0, &tol).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert_eq!(a.to_bits(), c.to_bits());
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerance::new(0.0, 1e-3, 10).is_err());
        assert!(Tolerance::new(1e-3, -1.0, 10).is_err());
        assert!(Tolerance::new(1e-3, 1e-3, 0).is_err());
        assert!(Tolerance::new(1e-3, 1e-3, 1).is_ok());
    }

    #[test]
    fn maximize_quadratic() {
        let (arg, max) = maximize_1d(|s| -(s - 0.3).powi(2), 0.0, 1.0, &Tolerance::default()).unwrap();
        assert!((arg - 0.3).abs() <= 1e-8, "{arg}");
        assert!(max.abs() < 1e-15);
    }

    #[test]
    fn maximize_prefers_global_peak() {
        // two bumps; the narrower one is higher
        let f = |x: f64| (-(x - 0.2).powi(2) / 0.01).exp() + 1.5 * (-(x - 0.8).powi(2) / 0.0004).exp();
        let (arg, max) = maximize_1d(f, 0.0, 1.0, &Tolerance::default()).unwrap();
        assert!((arg - 0.8).abs() < 1e-6);
        assert!((max - 1.5).abs() < 1e-6);
    }

    #[test]
    fn maximize_endpoint() {
        let (arg, _) = maximize_1d(|x| x, 0.0, 1.0, &Tolerance::default()).unwrap();
        assert!((arg - 1.0).abs() < 1e-9);
    }

    #[test]
    fn maximize_reports_nonfinite_point() {
        let err = maximize_1d(|x| if x > 0.5 { f64::NAN } else { x }, 0.0, 1.0, &Tolerance::default()).unwrap_err();
        match err {
            DosError::Evaluation { at, .. } => assert!(at > 0.5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn integrate_smooth_and_log_singular() {
        let v = integrate(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-13, 0.0, 1000).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        // ∫_0^1 -ln(u) du = 1
        let v = integrate(|u| if u > 0.0 { -u.ln() } else { 0.0 }, 0.0, 1.0, 1e-12, 0.0, 4000).unwrap();
        assert!((v - 1.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn integrate_panel_cap() {
        let err = integrate(|x| (1.0 / x).sin() / x, 1e-9, 1.0, 1e-14, 0.0, 4).unwrap_err();
        assert!(matches!(err, DosError::Solver(_)));
    }
}
