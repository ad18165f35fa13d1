//! Optimal threshold when the transmitter knows the channel exactly.
//!
//! ```bash
//! cargo run --release -p dos-lab --example perfect_csi
//! ```

use dos_lab::channel::ContentionParams;
use dos_lab::threshold::{perfect_lambda_prime, phi_perfect, solve_perfect_csi};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cont = ContentionParams::default();
    println!("delta = {}, p_s = {:.6}", cont.delta(), cont.p_s());
    println!("{:>8} {:>10} {:>14} {:>12}", "rho", "x*", "SNR threshold", "Phi(x*)");
    for rho in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0] {
        let x = solve_perfect_csi(rho, cont.delta(), cont.p_s())?;
        // a link transmits once its SNR clears this value
        let snr = perfect_lambda_prime(x, rho) * rho;
        println!("{rho:>8} {x:>10.6} {snr:>14.6} {:>12.6}", phi_perfect(x, rho, &cont)?);
    }
    Ok(())
}
