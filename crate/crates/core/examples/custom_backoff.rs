//! Threshold analysis for an arbitrary backoff function, checked against the
//! closed form on the linear case.
//!
//! ```bash
//! cargo run --release -p dos-lab --example custom_backoff
//! ```

use dos_lab::channel::{ChannelParams, ContentionParams, SnrConvention};
use dos_lab::specfun::Tolerance;
use dos_lab::threshold::{phi_general, phi_linear, solve_fixed_point_general, GeneralBackoffPolicy};

/// Nominated SNR as a function of `(ρ_eff, λ̂)`.
type Shape = fn(f64, f64) -> f64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ch = ChannelParams::from_alpha(1.0, 1.0, SnrConvention::Boosted)?;
    let cont = ContentionParams::default();
    let rho_eff = ch.rho_eff();

    let linear = GeneralBackoffPolicy::linear(0.285, 0.3, &ch)?;
    println!(
        "linear backoff: quadrature {:.12}, closed form {:.12}",
        phi_general(0.3, &linear, &ch, &cont)?,
        phi_linear(0.3, 0.285, &ch, &cont)?
    );

    let shapes: [(&str, Shape); 3] = [
        ("linear 0.285", |r, lh| 0.285 * r * lh),
        ("saturating", |r, lh| 0.45 * r * lh / (1.0 + 0.15 * lh)),
        ("offset", |r, lh| (0.35 * r * lh - 0.05).max(0.0)),
    ];
    for (name, shape) in shapes {
        let policy = GeneralBackoffPolicy::new(move |lh| shape(rho_eff, lh), 0.0, &ch)?;
        let x = solve_fixed_point_general(&policy, &ch, &cont, &Tolerance::default())?;
        println!("{name:>14}: x* = {x:.6}");
    }

    // the rate must not fall as the estimate improves
    let rejected = GeneralBackoffPolicy::new(move |lh| rho_eff * (-lh).exp(), 0.1, &ch);
    println!("decreasing backoff rejected: {}", rejected.unwrap_err());
    Ok(())
}
