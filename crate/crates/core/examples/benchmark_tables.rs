//! Regenerates the four benchmark tables (backoff-iteration convergence and
//! throughput gain) and prints them as CSV.
//!
//! ```bash
//! cargo run --release -p dos-lab --example benchmark_tables
//! ```

use dos_lab::reproduce::{self, StudySetup};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let setup = StudySetup::default();

    println!("# convergence of the backoff iteration, alpha = 1");
    print!("{}", reproduce::convergence_by_rho(&setup, &reproduce::CONVERGENCE_RHOS)?.to_csv(4));

    println!("\n# convergence of the backoff iteration, rho = 1");
    print!("{}", reproduce::convergence_by_alpha(&setup, &reproduce::CONVERGENCE_ALPHAS)?.to_csv(4));

    println!("\n# throughput gain over threshold-free transmission, alpha = 1");
    print!("{}", reproduce::gain_by_rho(&setup, &reproduce::GAIN_RHOS)?.to_csv(4));

    println!("\n# throughput gain over threshold-free transmission, rho = 0.5");
    print!("{}", reproduce::gain_by_alpha(&setup, &reproduce::GAIN_ALPHAS)?.to_csv(4));
    Ok(())
}
