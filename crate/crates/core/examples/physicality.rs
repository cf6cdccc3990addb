//! Tests candidate probability vectors for physicality. A vector can lie in
//! [0, 1] with the right sum and still fail to describe any state.
//!
//! `cargo run --example physicality`

use spintomo::io;
use spintomo::tomography::{self, Tomogram};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = io::preset("example1")?;
    let candidates = [
        vec![0.5, 0.5, 0.5, 0.5],
        vec![0.8, 0.2, 0.8, 0.2],
        vec![1.0, 1.0, 0.0, 0.0],
        vec![0.9, 0.6, 0.3, 0.2],
    ];
    for w in candidates {
        let t = Tomogram::new(w.clone(), s.label());
        let r = tomography::is_physical(&t, &s, s.tols().psd)?;
        let rho = tomography::inverse(&t, &s)?;
        println!(
            "w = {w:?}: {}  diag = [{:.4}, {:.4}]  det = {:.4}  norm = {:.4}  ρ12 = {:.4}{:+.4}i",
            if r.passed() { "physical" } else { "NOT physical" },
            r.diagonal[0],
            r.diagonal[1],
            r.determinant,
            r.normalization,
            rho[(0, 1)].re,
            rho[(0, 1)].im,
        );
    }
    Ok(())
}
