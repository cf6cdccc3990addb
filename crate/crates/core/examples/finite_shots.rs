//! Simulates measurements with a finite number of shots and shows the
//! reconstruction error shrinking roughly like 1/√M.
//!
//! `cargo run --release --example finite_shots`

use spintomo::geometry::BlochVector;
use spintomo::io;
use spintomo::states;
use spintomo::tomography::{self, median, quantile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = io::preset("example1")?;
    let rho = states::qubit_state(BlochVector::new(0.3, 0.4, 0.5));
    println!("{:>9} {:>12} {:>12} {:>12} {:>10}", "shots", "median err", "q90 err", "√M·median", "indefinite");
    for shots in [100u64, 1_000, 10_000, 100_000, 1_000_000] {
        let trials = tomography::run_trials(&rho, &s, shots, 42, 200)?;
        let errs: Vec<f64> = trials.iter().map(|t| t.frobenius_error).collect();
        let bad = trials.iter().filter(|t| t.min_eigenvalue < 0.0).count();
        let m = median(&errs);
        println!(
            "{shots:>9} {m:>12.3e} {:>12.3e} {:>12.4} {bad:>10}",
            quantile(&errs, 0.9),
            m * (shots as f64).sqrt()
        );
    }

    let counts = tomography::simulate_counts(&rho, &s, 5_000, 7)?;
    let est = tomography::estimate_state(&counts, &s, Some(&rho))?;
    println!("\none record: successes {:?} of {} each", counts.successes, counts.shots_per_component);
    println!("estimate error {:.3e}, min eigenvalue {:.4}", est.metrics.frobenius_error.unwrap_or(f64::NAN), est.metrics.min_eigenvalue);
    Ok(())
}
