//! Joint search for the backoff ratio and throughput threshold, printing the
//! iteration trace.
//!
//! ```bash
//! cargo run --release -p dos-lab --example optimize_backoff -- 1 5
//! ```

use dos_lab::channel::{ChannelParams, ContentionParams, SnrConvention};
use dos_lab::error::DosError;
use dos_lab::threshold::{optimize_backoff, OptimizeConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<f64>());
    let rho = args.next().transpose()?.unwrap_or(1.0);
    let alpha = args.next().transpose()?.unwrap_or(1.0);

    let ch = ChannelParams::from_alpha(rho, alpha, SnrConvention::Boosted)?;
    let cont = ContentionParams::default();
    let trace = optimize_backoff(&ch, &cont, &OptimizeConfig::default())?;

    println!("rho = {rho}, alpha = {alpha}");
    for it in &trace.iterates {
        match it.sigma {
            Some(s) => println!("  k = {}: x = {:.6}, sigma = {s:.6}", it.k, it.x),
            None => println!("  k = {}: x = {:.6}", it.k, it.x),
        }
    }
    println!(
        "converged after {} steps: x* = {:.6}, sigma* = {:.6}",
        trace.iterations(),
        trace.x_star,
        trace.sigma_star
    );

    // A tight iteration budget surfaces the partial trace instead of a bare failure.
    let tight = OptimizeConfig { max_iter: 2, eps: 1e-12, ..OptimizeConfig::default() };
    if let Err(DosError::NonConvergence { trace }) = optimize_backoff(&ch, &cont, &tight) {
        println!("with 2 steps the iteration stops at x = {:.6}", trace.x_star);
    }
    Ok(())
}
