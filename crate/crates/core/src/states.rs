//! Named and random density matrices used by tests, examples and the
//! simulation front end.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::cmatrix::{CMatrix, Complex};
use crate::geometry::BlochVector;
use crate::tolerance::Tolerances;
use crate::tomography::DensityMatrix;

/// `(E + e·σ)/2` for `|e| ≤ 1`. Panics on a longer vector.
pub fn qubit_state(e: BlochVector) -> DensityMatrix {
    assert!(e.norm() <= 1.0 + 1e-12, "Bloch vector longer than 1");
    let m = CMatrix::from_rows([
        [Complex::new(0.5 * (1.0 + e.gamma), 0.0), Complex::new(0.5 * e.alpha, -0.5 * e.beta)],
        [Complex::new(0.5 * e.alpha, 0.5 * e.beta), Complex::new(0.5 * (1.0 - e.gamma), 0.0)],
    ]);
    DensityMatrix::new(m, &Tolerances::default()).expect("valid Bloch state")
}

/// `(|0…0⟩ + |1…1⟩)/√2` on `n` qubits; `n = 2` is the Bell state Φ⁺.
pub fn ghz_state(n: usize) -> DensityMatrix {
    assert!(n >= 1);
    let dim = 1usize << n;
    let mut amps = vec![Complex::new(0.0, 0.0); dim];
    amps[0] = Complex::new(1.0, 0.0);
    amps[dim - 1] = Complex::new(1.0, 0.0);
    DensityMatrix::pure(&amps)
}

pub fn bell_state() -> DensityMatrix {
    ghz_state(2)
}

/// Haar-random pure state on `dim` levels.
pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    loop {
        let amps: Vec<Complex> = (0..dim)
            .map(|_| {
                Complex::new(
                    StandardNormal.sample(&mut *rng),
                    StandardNormal.sample(&mut *rng),
                )
            })
            .collect();
        if amps.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-12 {
            return DensityMatrix::pure(&amps);
        }
    }
}

/// Convex mixture of `dim` random pure states with flat Dirichlet weights.
pub fn random_mixed_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    let parts: Vec<(f64, DensityMatrix)> = (0..dim)
        .map(|_| {
            let w: f64 = Exp1.sample(&mut *rng);
            (w + f64::MIN_POSITIVE, random_pure_state(rng, dim))
        })
        .collect();
    DensityMatrix::mixture(&parts)
}

/// Pure or mixed with equal probability.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    if rng.random_bool(0.5) {
        random_pure_state(rng, dim)
    } else {
        random_mixed_state(rng, dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmatrix;
    use crate::tomography::purity;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn qubit_state_matches_bloch_form() {
        let rho = qubit_state(BlochVector::new(0.0, 0.8, 0.6));
        assert!((rho.matrix()[(0, 1)] - Complex::new(0.0, -0.4)).norm() < 1e-15);
        assert!((purity(&rho) - 1.0).abs() < 1e-15);
        let rho = qubit_state(BlochVector::ZERO);
        assert!((purity(&rho) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bell_state_entries() {
        let rho = bell_state();
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert!((rho.matrix()[(i, j)].re - 0.5).abs() < 1e-15);
        }
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_states_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let tols = Tolerances::default();
        for dim in [2, 4, 8] {
            for _ in 0..20 {
                let rho = random_state(&mut rng, dim);
                assert!(DensityMatrix::new(rho.matrix().clone(), &tols).is_ok());
                assert!(cmatrix::is_psd(rho.matrix(), 1e-12));
            }
        }
    }
}
