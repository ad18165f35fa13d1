use thiserror::Error;

use crate::threshold::SolverTrace;

pub type Result<T, E = DosError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum DosError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("root not bracketed on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("no convergence after {iterations} iterations (best iterate {best})")]
    Convergence { iterations: usize, best: f64 },

    #[error("objective is not finite at {at} (value {value})")]
    Evaluation { at: f64, value: f64 },

    #[error("invalid backoff policy: {0}")]
    Policy(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("backoff iteration did not converge within {} iterations", .trace.iterates.len().saturating_sub(1))]
    NonConvergence { trace: Box<SolverTrace> },

    #[error("threshold starves the channel: {expected_probes:.3e} expected probes per transmission exceeds the cap of {cap:.3e}")]
    Starvation { expected_probes: f64, cap: f64 },
}

impl DosError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        DosError::Domain(msg.into())
    }
}
