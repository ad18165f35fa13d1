//! Gain of threshold scheduling over transmitting after every successful
//! contention, across SNR and estimation quality.
//!
//! ```bash
//! cargo run --release -p dos-lab --example throughput_gain
//! ```

use dos_lab::channel::{ChannelParams, ContentionParams, SnrConvention};
use dos_lab::threshold::{throughput_gain, OptimizeConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cont = ContentionParams::default();
    let cfg = OptimizeConfig::default();

    println!("{:>6} {:>6} {:>9} {:>9} {:>8}", "rho", "alpha", "x*", "x^L", "gain");
    for rho in [0.5, 2.0, 10.0] {
        for alpha in [0.0, 0.1, 1.0, 5.0] {
            let ch = ChannelParams::from_alpha(rho, alpha, SnrConvention::Boosted)?;
            let g = throughput_gain(&ch, &cont, &cfg)?;
            println!("{rho:>6} {alpha:>6} {:>9.4} {:>9.4} {:>7.2}%", g.x_star, g.x_l, 100.0 * g.gain);
        }
    }
    Ok(())
}
