//! Rate-of-return map and fixed point for a fixed linear backoff ratio on a
//! channel known only through a noisy estimate.
//!
//! ```bash
//! cargo run --release -p dos-lab --example noisy_threshold
//! ```

use dos_lab::channel::{expected_rate_bar, ChannelParams, ContentionParams, SnrConvention};
use dos_lab::specfun::Tolerance;
use dos_lab::threshold::{lambda_hat_prime_linear, phi_linear, solve_fixed_point_linear};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cont = ContentionParams::default();
    let sigma = 0.285;

    for convention in [SnrConvention::Boosted, SnrConvention::Attenuated] {
        let ch = ChannelParams::from_alpha(1.0, 1.0, convention)?;
        println!("{convention:?}: rho = 1, alpha = 1, rho_eff = {:.4}", ch.rho_eff());

        for x in [0.0, 0.1, 0.2, 0.3, 0.4] {
            println!("  Phi({x:.1}, {sigma}) = {:.6}", phi_linear(x, sigma, &ch, &cont)?);
        }

        let x_star = solve_fixed_point_linear(sigma, &ch, &cont, &Tolerance::default())?;
        let lp = lambda_hat_prime_linear(x_star, sigma, &ch)?;
        let at_threshold = expected_rate_bar(lp, sigma * ch.rho_eff() * lp, &ch)?;
        println!("  fixed point x* = {x_star:.6}");
        println!("  estimate threshold = {lp:.6} (expected rate there {at_threshold:.6})");
        println!("  mean probes per transmission = {:.4}\n", lp.exp());
    }
    Ok(())
}
