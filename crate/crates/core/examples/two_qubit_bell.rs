//! Two-qubit tomography of a Bell state with a product scheme, including the
//! tensor identity check and a finite-shot run.
//!
//! `cargo run --release --example two_qubit_bell`

use spintomo::io;
use spintomo::multiqubit::{self, f_inv, TensorScheme, VerifyMode, TENSOR_TOL};
use spintomo::states;
use spintomo::tomography::median;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ts = TensorScheme::new(vec![io::preset("example1")?, io::preset("example2")?])?;
    println!("scheme {} on {} qubits, {} components", ts.label(), ts.n_qubits(), ts.len());

    let report = multiqubit::verify_tensor_identities(&ts, VerifyMode::Exhaustive)?;
    for c in report.checks(TENSOR_TOL) {
        println!("  [{}] {:<28} {:.2e}", if c.passed { "ok" } else { "!!" }, c.name, c.value);
    }

    let bell = states::bell_state();
    let w = multiqubit::forward_n(&bell, &ts)?;
    println!("\nΣw = {:.12}", w.sum());
    for (j, x) in w.w.iter().enumerate() {
        let js = f_inv(j + 1, 2)?;
        print!("w({},{}) = {x:.4}  ", js[0], js[1]);
        if j % 4 == 3 {
            println!();
        }
    }
    let back = multiqubit::inverse_n(&w, &ts)?;
    println!("round trip error {:.1e}", back.frobenius_distance(bell.matrix())?);

    for shots in [1_000u64, 100_000] {
        let t = multiqubit::run_trials_n(&bell, &ts, shots, 5, 100)?;
        let errs: Vec<f64> = t.iter().map(|o| o.frobenius_error).collect();
        println!("{shots:>7} shots: median error {:.3e}", median(&errs));
    }

    let ghz = states::ghz_state(3);
    let ts3 = TensorScheme::replicate(&io::preset("example1")?, 3)?;
    let w3 = multiqubit::forward_n(&ghz, &ts3)?;
    let back3 = multiqubit::inverse_n(&w3, &ts3)?;
    println!("three-qubit GHZ: Σw = {:.9}, round trip error {:.1e}", w3.sum(), back3.frobenius_distance(ghz.matrix())?);
    Ok(())
}
