//! Writes the four figure datasets as CSV files into a directory.
//!
//! ```bash
//! cargo run --release -p dos-lab --example figure_data -- /tmp/dos-figures
//! ```

use std::path::PathBuf;

use dos_lab::reproduce::{self, StudySetup};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "figures".into()));
    std::fs::create_dir_all(&dir)?;
    let setup = StudySetup::default();

    let tables = [
        ("phi_vs_sigma.csv", reproduce::phi_versus_sigma(&setup, 0.1, &[1.0, 10.0], 1.0, 101)?),
        ("phi_vs_threshold.csv", reproduce::phi_versus_threshold(&setup, &[1.0, 10.0], &[0.1, 1.0], 1.2, 121)?),
        (
            "sigma_vs_alpha.csv",
            reproduce::sigma_versus_alpha(&setup, &[0.5, 1.0, 10.0], &reproduce::DEFAULT_SIGMA_ALPHAS)?,
        ),
        (
            "throughput_vs_training.csv",
            reproduce::throughput_versus_training(&setup, &[1.0, 10.0], 10.0, &reproduce::logspace(0.01, 10.0, 101))?,
        ),
    ];
    for (name, table) in tables {
        let path = dir.join(name);
        std::fs::write(&path, table.to_csv(6))?;
        println!("{} ({} rows)", path.display(), table.rows.len());
    }
    Ok(())
}
