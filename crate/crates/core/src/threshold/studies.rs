use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{beta_from_training, ChannelParams, ContentionParams, SnrConvention};
use crate::error::{DosError, Result};

use super::{linear_uv, optimize_backoff, perfect_uv, OptimizeConfig, SolverTrace};

/// Optimal-scheduling throughput against transmitting on every successful
/// contention with the same backoff ratio.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThroughputGain {
    pub x_star: f64,
    pub sigma_star: f64,
    /// Throughput with threshold zero, `Φ(0, σ*)`.
    pub x_l: f64,
    /// `(x* − x_l) / x_l`.
    pub gain: f64,
    #[serde(skip)]
    pub trace: SolverTrace,
}

pub fn throughput_gain(ch: &ChannelParams, cont: &ContentionParams, cfg: &OptimizeConfig) -> Result<ThroughputGain> {
    let trace = optimize_backoff(ch, cont, cfg)?;
    let (u, v) =
        if ch.is_perfect() { perfect_uv(0.0, ch.rho(), cont) } else { linear_uv(0.0, trace.sigma_star, ch, cont) };
    let x_l = u / v;
    if !(x_l > 0.0) {
        return Err(DosError::Solver(format!("baseline throughput is {x_l}; gain undefined")));
    }
    Ok(ThroughputGain {
        x_star: trace.x_star,
        sigma_star: trace.sigma_star,
        x_l,
        gain: (trace.x_star - x_l) / x_l,
        trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrainingPoint {
    pub tau: f64,
    pub beta: f64,
    pub x_star: f64,
    pub sigma_star: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingSweep {
    pub rho: f64,
    pub points: Vec<TrainingPoint>,
    /// Grid point with the largest throughput.
    pub best: TrainingPoint,
}

/// Throughput as a function of training time, with `β = 1/(ρτ + 1)` and the
/// contention mini-slot equal to the training time (`δ = τ/T`).
///
/// Grid points are solved in parallel; the result keeps the grid order.
pub fn sweep_training_time(
    rho: f64,
    t_data: f64,
    tau_grid: &[f64],
    p_s: f64,
    convention: SnrConvention,
    cfg: &OptimizeConfig,
) -> Result<TrainingSweep> {
    if tau_grid.is_empty() {
        return Err(DosError::domain("training-time grid is empty"));
    }
    let points = tau_grid
        .par_iter()
        .map(|&tau| {
            let beta = beta_from_training(rho, tau)?;
            let ch = ChannelParams::from_beta(rho, beta, convention)?;
            let cont = ContentionParams::from_success_prob(p_s, tau, t_data)?;
            let trace = optimize_backoff(&ch, &cont, cfg)?;
            Ok(TrainingPoint { tau, beta, x_star: trace.x_star, sigma_star: trace.sigma_star })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = *points.iter().max_by(|a, b| a.x_star.total_cmp(&b.x_star)).expect("grid is non-empty");
    Ok(TrainingSweep { rho, points, best })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gain_is_positive() {
        let ch = ChannelParams::from_alpha(10.0, 1.0, SnrConvention::Boosted).unwrap();
        let g = throughput_gain(&ch, &ContentionParams::default(), &OptimizeConfig::default()).unwrap();
        assert!(g.x_star > g.x_l);
        assert!((g.gain - (g.x_star - g.x_l) / g.x_l).abs() < 1e-15);
    }

    #[test]
    fn perfect_gain_baseline() {
        let ch = ChannelParams::perfect(0.5).unwrap();
        let g = throughput_gain(&ch, &ContentionParams::default(), &OptimizeConfig::default()).unwrap();
        assert_eq!(g.sigma_star, 1.0);
        assert!((g.x_l - 0.284).abs() < 2e-3, "{}", g.x_l);
    }

    #[test]
    fn training_sweep_shape() {
        let grid: Vec<f64> = (0..25).map(|i| 10f64.powf(-2.0 + 3.0 * i as f64 / 24.0)).collect();
        let sweep =
            sweep_training_time(1.0, 10.0, &grid, (-1f64).exp(), SnrConvention::Boosted, &OptimizeConfig::default())
                .unwrap();
        assert_eq!(sweep.points.len(), grid.len());
        assert!(sweep.points.iter().zip(&grid).all(|(p, t)| p.tau == *t));
        assert!(sweep.best.tau > grid[0] && sweep.best.tau < grid[grid.len() - 1]);
        assert!(sweep_training_time(1.0, 10.0, &[], 0.3, SnrConvention::Boosted, &OptimizeConfig::default()).is_err());
    }
}
