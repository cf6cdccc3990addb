//! Builds both built-in schemes and prints their components and the identity
//! checks they satisfy.
//!
//! `cargo run --example preset_schemes`

use spintomo::cmatrix::CMatrix;
use spintomo::io;
use spintomo::scheme::scheme_diagnostics;

fn show(name: &str, k: usize, m: &CMatrix) {
    println!("  {name}{k} =");
    for r in 0..2 {
        let row: Vec<String> = (0..2)
            .map(|c| format!("{:+.6}{:+.6}i", m[(r, c)].re, m[(r, c)].im))
            .collect();
        println!("    [{}]", row.join("  "));
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for name in io::PRESET_NAMES {
        let s = io::preset(name)?;
        let d = scheme_diagnostics(&s);
        println!("{name}");
        for (k, e) in s.quadruple().vectors().iter().enumerate() {
            println!("  e{} = {e}  |e| = {:.6}", k + 1, e.norm());
        }
        println!("  Δ = {:?}", d.deltas);
        for k in 0..4 {
            show("U", k + 1, &s.dequantizer()[k]);
        }
        for k in 0..4 {
            show("D", k + 1, &s.quantizer()[k]);
            let (a, b) = d.quantizer_eigenvalues[k];
            println!("    eigenvalues {a:.6}, {b:.6}");
        }
        for c in d.checks(s.tols()) {
            println!("  [{}] {:<40} {:.2e} (bound {:.0e})", if c.passed { "ok" } else { "!!" }, c.name, c.value, c.bound);
        }
        println!();
    }
    Ok(())
}
