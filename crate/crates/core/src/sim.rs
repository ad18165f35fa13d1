//! Renewal-reward Monte Carlo simulator of the scheduling protocol.
//!
//! One episode runs from the end of a transmission to the end of the next:
//! contend (`K ~ Geometric(p_s)` mini-slots), probe (`λ̂ ~ Exp(1)`), and
//! either release the channel or stop and transmit for `T`. A transmission
//! in outage earns nothing but still occupies the slot. Throughput is the
//! ratio of summed rewards to summed time.

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{actual_snr, rate_bar, ChannelParams, ContentionParams, RngStream};
use crate::error::{DosError, Result};
use crate::specfun::Tolerance;
use crate::threshold::{
    lambda_hat_prime_linear, perfect_lambda_prime, threshold_estimate_general, GeneralBackoffPolicy,
    LinearBackoffPolicy,
};

/// 97.5% standard normal quantile.
const Z_975: f64 = 1.959_963_984_540_054;

pub const DEFAULT_PROBE_CAP: f64 = 1e7;

#[derive(Debug, Clone)]
pub enum SimPolicy {
    Linear(LinearBackoffPolicy),
    General(GeneralBackoffPolicy),
    /// Exact rate `ln(1 + ρ λ̂)` is known; requires a channel with `α = 0`.
    PerfectCsi {
        threshold_x: f64,
    },
}

impl SimPolicy {
    pub fn threshold(&self) -> f64 {
        match self {
            SimPolicy::Linear(p) => p.threshold_x,
            SimPolicy::General(p) => p.threshold_x,
            SimPolicy::PerfectCsi { threshold_x } => *threshold_x,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub channel: ChannelParams,
    pub contention: ContentionParams,
    pub policy: SimPolicy,
    /// Transmissions (stopping events) per replication.
    pub num_transmissions: u64,
    pub seed: u64,
    pub num_replications: usize,
    /// Largest tolerated expected number of probes per transmission.
    pub probe_cap: f64,
    pub parallel: bool,
}

impl SimConfig {
    pub fn new(channel: ChannelParams, contention: ContentionParams, policy: SimPolicy) -> Self {
        Self {
            channel,
            contention,
            policy,
            num_transmissions: 100_000,
            seed: 0,
            num_replications: 30,
            probe_cap: DEFAULT_PROBE_CAP,
            parallel: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.num_transmissions == 0 {
            return Err(DosError::domain("at least one transmission per replication is required"));
        }
        if self.num_replications == 0 {
            return Err(DosError::domain("at least one replication is required"));
        }
        let p_s = self.contention.p_s();
        if !(p_s > 0.0 && p_s <= 1.0) {
            return Err(DosError::domain(format!("success probability must lie in (0, 1], got {p_s}")));
        }
        let threshold = self.policy.threshold();
        if !(threshold >= 0.0) || !threshold.is_finite() {
            return Err(DosError::domain(format!("threshold must be finite and non-negative, got {threshold}")));
        }
        match &self.policy {
            SimPolicy::PerfectCsi { .. } if !self.channel.is_perfect() => {
                Err(DosError::domain("perfect-CSI policy needs a channel with alpha = 0"))
            }
            SimPolicy::Linear(_) | SimPolicy::General(_) => self.channel.require_noisy(),
            _ => Ok(()),
        }
    }

    /// Estimate-domain threshold `λ̂'`; probes pass independently with
    /// probability `e^{−λ̂'}`.
    pub fn threshold_estimate(&self) -> Result<f64> {
        let x = self.policy.threshold();
        match &self.policy {
            SimPolicy::Linear(p) if p.sigma == 0.0 => Ok(if x == 0.0 { 0.0 } else { f64::INFINITY }),
            SimPolicy::Linear(p) => lambda_hat_prime_linear(x, p.sigma, &self.channel),
            SimPolicy::General(p) => {
                let tol = Tolerance { abs_tol: 1e-12, rel_tol: 1e-14, max_iter: 500 };
                Ok(threshold_estimate_general(x, p, &self.channel, &tol)?.unwrap_or(f64::INFINITY))
            }
            SimPolicy::PerfectCsi { .. } => Ok(perfect_lambda_prime(x, self.channel.rho())),
        }
    }

    fn check_starvation(&self) -> Result<()> {
        let expected_probes = self.threshold_estimate()?.exp();
        if expected_probes > self.probe_cap {
            return Err(DosError::Starvation { expected_probes, cap: self.probe_cap });
        }
        Ok(())
    }
}

/// Outcome of one contend-probe-transmit cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Episode {
    pub probes: u64,
    /// Contention mini-slots spent.
    pub rounds: u64,
    /// Estimate of the probe that stopped.
    pub estimate: f64,
    pub nominated_snr: f64,
    pub actual_snr: f64,
    pub reward: f64,
    pub duration: f64,
    pub outage: bool,
}

enum Rule<'a> {
    Linear { scale: f64 },
    General(&'a GeneralBackoffPolicy),
    Perfect { rho: f64 },
}

/// Executes episodes for a validated configuration.
pub struct Protocol<'a> {
    cfg: &'a SimConfig,
    rule: Rule<'a>,
    threshold: f64,
    probe_limit: u64,
}

impl<'a> Protocol<'a> {
    pub fn new(cfg: &'a SimConfig) -> Result<Self> {
        cfg.validate()?;
        cfg.check_starvation()?;
        let rule = match &cfg.policy {
            SimPolicy::Linear(p) => Rule::Linear { scale: p.sigma * cfg.channel.rho_eff() },
            SimPolicy::General(p) => Rule::General(p),
            SimPolicy::PerfectCsi { .. } => Rule::Perfect { rho: cfg.channel.rho() },
        };
        Ok(Self {
            cfg,
            rule,
            threshold: cfg.policy.threshold(),
            probe_limit: cfg.probe_cap.min(u64::MAX as f64) as u64,
        })
    }

    #[inline]
    fn nominated(&self, lh: f64) -> f64 {
        match &self.rule {
            Rule::Linear { scale } => scale * lh,
            Rule::General(p) => p.nominated_snr(lh),
            Rule::Perfect { rho } => rho * lh,
        }
    }

    #[inline]
    fn score(&self, lh: f64) -> f64 {
        match &self.rule {
            Rule::Perfect { rho } => (rho * lh).ln_1p(),
            _ => rate_bar(lh, self.nominated(lh), &self.cfg.channel),
        }
    }

    pub fn episode(&self, rng: &mut RngStream) -> Result<Episode> {
        let cont = &self.cfg.contention;
        let mut probes = 0u64;
        let mut rounds = 0u64;
        let estimate = loop {
            rounds += rng.geometric(cont.p_s());
            let lh = rng.sample_estimate();
            probes += 1;
            if self.score(lh) >= self.threshold {
                break lh;
            }
            if probes >= self.probe_limit {
                return Err(DosError::Starvation { expected_probes: probes as f64, cap: self.cfg.probe_cap });
            }
        };

        let nominated_snr = self.nominated(estimate);
        let (actual, success) = match self.rule {
            Rule::Perfect { .. } => (nominated_snr, true),
            _ => {
                let z = rng.sample_error();
                let actual = actual_snr(estimate, z, &self.cfg.channel);
                (actual, nominated_snr <= actual)
            }
        };
        let reward = if success { cont.t_data() * nominated_snr.ln_1p() } else { 0.0 };
        Ok(Episode {
            probes,
            rounds,
            estimate,
            nominated_snr,
            actual_snr: actual,
            reward,
            duration: rounds as f64 * cont.tau() + cont.t_data(),
            outage: !success,
        })
    }
}

/// Totals over one replication.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ReplicationStats {
    pub reward: f64,
    pub time: f64,
    pub transmissions: u64,
    pub outages: u64,
    pub probes: u64,
    pub rounds: u64,
}

impl ReplicationStats {
    pub fn throughput(&self) -> f64 {
        self.reward / self.time
    }
}

/// Simulates replication `index` on stream `(cfg.seed, index)`.
pub fn run_replication(cfg: &SimConfig, index: u64) -> Result<ReplicationStats> {
    let protocol = Protocol::new(cfg)?;
    replicate(&protocol, cfg, index)
}

fn replicate(protocol: &Protocol<'_>, cfg: &SimConfig, index: u64) -> Result<ReplicationStats> {
    let mut rng = RngStream::new(cfg.seed, index);
    let mut stats = ReplicationStats::default();
    for _ in 0..cfg.num_transmissions {
        let ep = protocol.episode(&mut rng)?;
        stats.reward += ep.reward;
        stats.time += ep.duration;
        stats.transmissions += 1;
        stats.outages += u64::from(ep.outage);
        stats.probes += ep.probes;
        stats.rounds += ep.rounds;
    }
    Ok(stats)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub empirical_throughput: f64,
    /// Half-width of the 95% normal confidence interval across replications;
    /// absent with a single replication.
    pub ci_halfwidth_95: Option<f64>,
    pub outage_fraction: f64,
    pub mean_probes_per_transmission: f64,
    pub total_rounds: u64,
    pub transmissions: u64,
    pub replications: usize,
}

fn summarize(runs: &[ReplicationStats]) -> SimReport {
    let n = runs.len() as f64;
    let throughputs: Vec<f64> = runs.iter().map(ReplicationStats::throughput).collect();
    let mean = throughputs.iter().sum::<f64>() / n;
    let ci = (runs.len() >= 2).then(|| {
        let var = throughputs.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Z_975 * (var / n).sqrt()
    });
    let transmissions: u64 = runs.iter().map(|r| r.transmissions).sum();
    let outages: u64 = runs.iter().map(|r| r.outages).sum();
    let probes: u64 = runs.iter().map(|r| r.probes).sum();
    SimReport {
        empirical_throughput: mean,
        ci_halfwidth_95: ci,
        outage_fraction: outages as f64 / transmissions as f64,
        mean_probes_per_transmission: probes as f64 / transmissions as f64,
        total_rounds: runs.iter().map(|r| r.rounds).sum(),
        transmissions,
        replications: runs.len(),
    }
}

/// Single run of `num_transmissions` episodes on stream `(seed, 0)`.
pub fn run_simulation(cfg: &SimConfig) -> Result<SimReport> {
    Ok(summarize(&[run_replication(cfg, 0)?]))
}

/// `num_replications` independent runs on streams `(seed, 0..n)`.
///
/// Replications may execute in parallel; aggregation is an ordered reduction
/// by replication index, so the report is bitwise identical either way.
pub fn run_replications(cfg: &SimConfig) -> Result<SimReport> {
    let protocol = Protocol::new(cfg)?;
    let indices = 0..cfg.num_replications as u64;
    let results: Vec<Result<ReplicationStats>> = if cfg.parallel {
        indices.into_par_iter().map(|i| replicate(&protocol, cfg, i)).collect()
    } else {
        indices.map(|i| replicate(&protocol, cfg, i)).collect()
    };
    let runs = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(summarize(&runs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::SnrConvention;

    fn config(sigma: f64, threshold: f64) -> SimConfig {
        let ch = ChannelParams::from_alpha(1.0, 1.0, SnrConvention::Boosted).unwrap();
        let policy = SimPolicy::Linear(LinearBackoffPolicy::new(sigma, threshold).unwrap());
        let mut cfg = SimConfig::new(ch, ContentionParams::default(), policy);
        cfg.num_transmissions = 2_000;
        cfg.num_replications = 4;
        cfg
    }

    #[test]
    fn starvation_is_detected_up_front() {
        let cfg = config(0.285, 1e9);
        assert!(matches!(run_replications(&cfg), Err(DosError::Starvation { .. })));
        let cfg = config(0.285, 3.0);
        assert!(matches!(run_simulation(&cfg), Err(DosError::Starvation { .. })));
    }

    #[test]
    fn policy_channel_mismatch() {
        let mut cfg = config(0.3, 0.1);
        cfg.policy = SimPolicy::PerfectCsi { threshold_x: 0.1 };
        assert!(matches!(run_simulation(&cfg), Err(DosError::Domain(_))));
        cfg.channel = ChannelParams::perfect(1.0).unwrap();
        cfg.policy = SimPolicy::Linear(LinearBackoffPolicy::new(0.3, 0.1).unwrap());
        assert!(matches!(run_simulation(&cfg), Err(DosError::Domain(_))));
    }

    #[test]
    fn rejects_empty_runs() {
        let mut cfg = config(0.3, 0.1);
        cfg.num_transmissions = 0;
        assert!(run_simulation(&cfg).is_err());
        let mut cfg = config(0.3, 0.1);
        cfg.num_replications = 0;
        assert!(run_replications(&cfg).is_err());
    }

    #[test]
    fn report_invariants() {
        let report = run_replications(&config(0.285, 0.301)).unwrap();
        assert!(report.empirical_throughput >= 0.0);
        assert!((0.0..=1.0).contains(&report.outage_fraction));
        assert!(report.mean_probes_per_transmission >= 1.0);
        assert_eq!(report.transmissions, 8_000);
        assert_eq!(report.replications, 4);
        assert!(report.ci_halfwidth_95.unwrap() > 0.0);
        assert!(report.total_rounds >= 8_000);
        let single = run_simulation(&config(0.285, 0.301)).unwrap();
        assert_eq!(single.ci_halfwidth_95, None);
    }

    #[test]
    fn zero_ratio_never_transmits_anything_useful() {
        let report = run_simulation(&config(0.0, 0.0)).unwrap();
        assert_eq!(report.empirical_throughput, 0.0);
        assert_eq!(report.mean_probes_per_transmission, 1.0);
    }

    #[test]
    fn episodes_respect_channel_structure() {
        let cfg = config(0.4, 0.2);
        let protocol = Protocol::new(&cfg).unwrap();
        let mut rng = RngStream::new(3, 0);
        for _ in 0..10_000 {
            let ep = protocol.episode(&mut rng).unwrap();
            assert!(ep.actual_snr <= cfg.channel.rho_eff() * ep.estimate);
            assert!(ep.probes >= 1 && ep.rounds >= ep.probes);
            assert_eq!(ep.outage, ep.reward == 0.0);
        }
    }
}
