//! Monte Carlo check of the optimal policy: one long run, then independent
//! replications with a confidence interval.
//!
//! ```bash
//! cargo run --release -p dos-lab --example simulate
//! ```

use dos_lab::reproduce::StudySetup;
use dos_lab::sim::{run_replications, run_simulation, SimConfig, SimPolicy};
use dos_lab::threshold::lambda_hat_prime_linear;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let setup = StudySetup::default();
    let (rho, alpha) = (1.0, 1.0);
    let ch = setup.channel(rho, alpha)?;
    let trace = setup.optimize(rho, alpha)?;
    let policy = trace.policy();
    println!("analytic: x* = {:.6} at sigma* = {:.6}", trace.x_star, trace.sigma_star);

    let mut cfg = SimConfig::new(ch, setup.contention.clone(), SimPolicy::Linear(policy));
    cfg.seed = 2024;
    cfg.num_transmissions = 1_000_000;
    let single = run_simulation(&cfg)?;
    println!("single run of 1e6 transmissions: {:.6}", single.empirical_throughput);

    cfg.num_transmissions = 100_000;
    cfg.num_replications = 30;
    let report = run_replications(&cfg)?;
    let ci = report.ci_halfwidth_95.unwrap_or(f64::NAN);
    println!("30 replications: {:.6} ± {ci:.6}", report.empirical_throughput);
    println!("outage fraction: {:.4}", report.outage_fraction);

    let expected_probes = lambda_hat_prime_linear(policy.threshold_x, policy.sigma, &ch)?.exp();
    println!("probes per transmission: {:.4} (expected {expected_probes:.4})", report.mean_probes_per_transmission);
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
