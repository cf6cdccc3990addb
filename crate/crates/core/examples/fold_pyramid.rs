//! Folds a unit square along a diagonal at several angles and shows how the
//! coplanarity determinant and the quantizer eigenvalues respond.
//!
//! `cargo run --example fold_pyramid`

use std::f64::consts::PI;

use spintomo::geometry::{fold_quadrilateral, FoldDiagonal, PlanarQuadrilateral};
use spintomo::scheme::{scheme_diagnostics, Spin12Scheme};
use spintomo::tolerance::Tolerances;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tols = Tolerances::default();
    let square = PlanarQuadrilateral::unit_rhombus(PI / 2.0, FoldDiagonal::V0V2, &tols)?;
    println!("{:>8} {:>12} {:>12} {:>12} {:>10}", "angle", "|Δ1|", "min λ(D)", "max λ(D)", "orth");
    for step in 1..=8 {
        let angle = step as f64 * PI / 8.0;
        let q = match fold_quadrilateral(&square, angle, &tols) {
            Ok(q) => q,
            Err(e) => {
                println!("{:>8.4} rejected: {e}", angle);
                continue;
            }
        };
        let s = Spin12Scheme::new(q, format!("fold-{step}"), tols)?;
        let d = scheme_diagnostics(&s);
        let lo = d.quantizer_eigenvalues.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let hi = d.quantizer_eigenvalues.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        println!(
            "{:>8.4} {:>12.6} {:>12.4} {:>12.4} {:>10.1e}",
            angle,
            d.deltas[0].abs(),
            lo,
            hi,
            d.orthogonality_residual
        );
    }
    Ok(())
}
