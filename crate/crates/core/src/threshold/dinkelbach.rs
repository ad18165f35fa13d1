use crate::channel::{ChannelParams, ContentionParams};
use crate::error::{DosError, Result};
use crate::specfun::{maximize_1d_with_grid, Tolerance, DEFAULT_GRID_POINTS};

use super::{linear_uv, perfect_uv, Iterate, SolverTrace};

/// Settings for [`optimize_backoff`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeConfig {
    pub x0: f64,
    /// Stop once `|x_k − x_{k−1}| ≤ eps`.
    pub eps: f64,
    pub max_iter: usize,
    /// Search interval for the backoff ratio; both ends give zero throughput,
    /// so the interval stays strictly inside `(0, 1)`.
    pub sigma_lo: f64,
    pub sigma_hi: f64,
    pub grid_points: usize,
    pub inner_tol: Tolerance,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self {
            x0: 0.5,
            eps: 1e-6,
            max_iter: 100,
            sigma_lo: 1e-4,
            sigma_hi: 1.0 - 1e-4,
            grid_points: DEFAULT_GRID_POINTS,
            inner_tol: Tolerance::default(),
        }
    }
}

impl OptimizeConfig {
    fn validate(&self) -> Result<()> {
        if !(self.x0 > 0.0) || !self.x0.is_finite() {
            return Err(DosError::domain(format!("starting throughput must be positive, got {}", self.x0)));
        }
        if !(self.eps > 0.0) {
            return Err(DosError::domain(format!("eps must be positive, got {}", self.eps)));
        }
        if self.max_iter == 0 {
            return Err(DosError::domain("max_iter must be at least 1"));
        }
        if !(0.0 < self.sigma_lo && self.sigma_lo < self.sigma_hi && self.sigma_hi < 1.0) {
            return Err(DosError::domain(format!(
                "sigma search interval must satisfy 0 < lo < hi < 1, got [{}, {}]",
                self.sigma_lo, self.sigma_hi
            )));
        }
        Ok(())
    }
}

/// Jointly optimal backoff ratio and threshold `(σ*, x*(σ*))`.
///
/// Each step maximizes `U(σ, x) − x·V(σ, x)` over `σ` and then sets
/// `x ← U/V` at the maximizer. A perfect-CSI channel (`α = 0`) needs no
/// backoff; it runs the same update with `σ = 1` and the exact rate.
pub fn optimize_backoff(ch: &ChannelParams, cont: &ContentionParams, cfg: &OptimizeConfig) -> Result<SolverTrace> {
    cfg.validate()?;
    cont.require_solvable()?;

    let step = |x: f64| -> Result<(f64, f64)> {
        if ch.is_perfect() {
            let (u, v) = perfect_uv(x, ch.rho(), cont);
            return Ok((1.0, u / v));
        }
        let (sigma, _) = maximize_1d_with_grid(
            |s| {
                let (u, v) = linear_uv(x, s, ch, cont);
                u - x * v
            },
            cfg.sigma_lo,
            cfg.sigma_hi,
            &cfg.inner_tol,
            cfg.grid_points,
        )?;
        let (u, v) = linear_uv(x, sigma, ch, cont);
        Ok((sigma, u / v))
    };

    let mut iterates = vec![Iterate { k: 0, x: cfg.x0, sigma: None }];
    let mut x = cfg.x0;
    let mut sigma = f64::NAN;
    for k in 1..=cfg.max_iter {
        let (s, next) = step(x)?;
        iterates.push(Iterate { k, x: next, sigma: Some(s) });
        let done = (next - x).abs() <= cfg.eps;
        x = next;
        sigma = s;
        if done {
            return Ok(SolverTrace { iterates, converged: true, sigma_star: sigma, x_star: x });
        }
    }
    Err(DosError::NonConvergence {
        trace: Box::new(SolverTrace { iterates, converged: false, sigma_star: sigma, x_star: x }),
    })
}
