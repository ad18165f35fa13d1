//! Trade-off between channel training time and estimation error: longer
//! training lowers the error variance but eats into the contention budget.
//!
//! ```bash
//! cargo run --release -p dos-lab --example training_time
//! ```

use dos_lab::channel::SnrConvention;
use dos_lab::reproduce::logspace;
use dos_lab::threshold::{sweep_training_time, OptimizeConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t_data = 10.0;
    let taus = logspace(0.01, 10.0, 61);
    let p_s = (-1f64).exp();

    for rho in [1.0, 10.0, 100.0] {
        let sweep = sweep_training_time(rho, t_data, &taus, p_s, SnrConvention::Boosted, &OptimizeConfig::default())?;
        let b = sweep.best;
        println!(
            "rho = {rho:>5}: best tau = {:.4} (beta = {:.4}), x* = {:.4}, sigma* = {:.4}",
            b.tau, b.beta, b.x_star, b.sigma_star
        );
    }
    Ok(())
}
