//! Samples random admissible schemes of each purity class and summarizes how
//! close to degenerate they are.
//!
//! `cargo run --release --example random_schemes`

use spintomo::geometry::{random_quadruple, PurityClass, SamplerOptions};
use spintomo::scheme::{scheme_diagnostics, Spin12Scheme};
use spintomo::tolerance::Tolerances;
use spintomo::tomography::{derive_seed, median};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = SamplerOptions::default();
    for mode in [PurityClass::AllPure, PurityClass::AllMixed, PurityClass::Heterogeneous] {
        let mut deltas = Vec::new();
        let mut worst_orth: f64 = 0.0;
        let mut failed = 0;
        for i in 0..500 {
            let q = random_quadruple(derive_seed(2024, i), mode, &opts)?;
            let s = Spin12Scheme::new(q, format!("random-{i}"), Tolerances::default())?;
            let d = scheme_diagnostics(&s);
            deltas.push(d.deltas[0].abs());
            worst_orth = worst_orth.max(d.orthogonality_residual);
            if !d.passed(s.tols()) {
                failed += 1;
            }
        }
        println!(
            "{:<14} median |Δ| {:.4}  min |Δ| {:.2e}  worst orth {:.1e}  failing {failed}/500",
            mode.to_string(),
            median(&deltas),
            deltas.iter().cloned().fold(f64::INFINITY, f64::min),
            worst_orth,
        );
    }
    Ok(())
}
