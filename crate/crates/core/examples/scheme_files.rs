//! Writes every file kind to a temporary directory, reads them back and shows
//! what a loader reports for a corrupted file.
//!
//! `cargo run --example scheme_files`

use spintomo::io;
use spintomo::multiqubit::TensorScheme;
use spintomo::tomography;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("spintomo-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;

    let s = io::preset("example1")?;
    let rho = spintomo::tomography::DensityMatrix::maximally_mixed(2);
    let w = tomography::forward(&rho, &s)?;
    let counts = tomography::simulate_counts(&rho, &s, 1000, 1)?;
    let ts = TensorScheme::replicate(&s, 2)?;

    io::save_scheme(&dir.join("scheme.json"), &s)?;
    io::save_state(&dir.join("state.json"), &rho)?;
    io::save_tomogram(&dir.join("tomogram.json"), &w, 1)?;
    io::save_counts(&dir.join("counts.json"), &counts)?;
    io::save_tensor_scheme(&dir.join("tensor.json"), &ts)?;

    assert_eq!(io::load_scheme(&dir.join("scheme.json"))?, s);
    assert_eq!(io::load_tomogram(&dir.join("tomogram.json"))?.w, w.w);
    assert_eq!(io::load_counts(&dir.join("counts.json"))?, counts);
    assert_eq!(io::load_tensor_scheme(&dir.join("tensor.json"))?.n_qubits(), 2);
    println!("all five file kinds round-trip through {}", dir.display());
    println!("\n{}", std::fs::read_to_string(dir.join("tomogram.json"))?);

    let mut text = std::fs::read_to_string(dir.join("scheme.json"))?;
    text = text.replacen("\"format_version\": \"1.0\"", "\"format_version\": \"2.0\"", 1);
    std::fs::write(dir.join("future.json"), &text)?;
    println!("future version: {}", io::load_scheme(&dir.join("future.json")).unwrap_err());
    println!("wrong kind:     {}", io::load_scheme(&dir.join("state.json")).unwrap_err());

    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
