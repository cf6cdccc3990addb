//! Maps a few single-qubit states to tomograms and back.
//!
//! `cargo run --example round_trip`

use spintomo::geometry::BlochVector;
use spintomo::io;
use spintomo::states;
use spintomo::tomography;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = io::preset("example1")?;
    let inputs = [
        ("spin up", BlochVector::new(0.0, 0.0, 1.0)),
        ("spin down", BlochVector::new(0.0, 0.0, -1.0)),
        ("+x", BlochVector::new(1.0, 0.0, 0.0)),
        ("mixed", BlochVector::new(0.2, -0.3, 0.1)),
        ("maximally mixed", BlochVector::new(0.0, 0.0, 0.0)),
    ];
    for (name, r) in inputs {
        let rho = states::qubit_state(r);
        let w = tomography::forward(&rho, &s)?;
        let back = tomography::inverse(&w, &s)?;
        println!(
            "{name:<16} w = [{}]  Σw = {:.12}  ‖ρ' − ρ‖ = {:.1e}  purity = {:.4}",
            w.w.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(", "),
            w.sum(),
            back.frobenius_distance(rho.matrix())?,
            tomography::purity(&rho),
        );
    }
    Ok(())
}
