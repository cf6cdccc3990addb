//! Forward map `w_j = Tr{ρ U_j}`, inverse map `ρ = Σ_j w_j D_j`, physicality
//! tests on candidate tomograms and a finite-shot measurement layer with
//! linear-inversion estimation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cmatrix::{self, trace_product, CMatrix, Complex, LinalgError};
use crate::scheme::Spin12Scheme;
use crate::tolerance::Tolerances;

/// Allowed deviation of `Tr ρ` from one for an accepted density matrix.
pub const TRACE_TOL: f64 = 1e-12;
/// Largest imaginary part tolerated in `Tr{ρ U_j}` before it is discarded.
pub const IMAGINARY_TOL: f64 = 1e-10;
/// Slack on probabilities fed to the binomial sampler.
pub const PROBABILITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TomographyError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("tomogram length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("density matrix dimension {0} is not a power of two")]
    DimensionNotPowerOfTwo(usize),
    #[error("density matrix is not Hermitian (residual {0:e})")]
    NotHermitian(f64),
    #[error("density matrix trace is {0}, expected 1")]
    TraceNotOne(f64),
    #[error("density matrix has negative eigenvalue {0:e}")]
    NotPositive(f64),
    #[error("Tr{{ρU_{index}}} has imaginary part {value:e}")]
    ImaginaryResidue { index: usize, value: f64 },
    #[error("probability w_{index} = {value} outside [0, 1]")]
    ProbabilityOutOfRange { index: usize, value: f64 },
    #[error("shot count must be at least 1")]
    ZeroShots,
    #[error("successes[{index}] = {successes} exceeds {shots} shots")]
    TooManySuccesses { index: usize, successes: u64, shots: u64 },
}

/// A validated density matrix on `2^N` levels: Hermitian, unit trace,
/// positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    pub fn new(mat: CMatrix, tols: &Tolerances) -> Result<Self, TomographyError> {
        let dim = mat.dim();
        if !dim.is_power_of_two() {
            return Err(TomographyError::DimensionNotPowerOfTwo(dim));
        }
        let residual = mat.hermitian_residual();
        if residual > tols.herm {
            return Err(TomographyError::NotHermitian(residual));
        }
        let trace = mat.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(TomographyError::TraceNotOne(trace));
        }
        let min = cmatrix::min_eigenvalue(&mat, tols.herm)?;
        if min < -tols.psd {
            return Err(TomographyError::NotPositive(min));
        }
        Ok(DensityMatrix { mat })
    }

    /// `E/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            mat: CMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// `|ψ⟩⟨ψ|` for the normalized `amplitudes`; the input is rescaled to
    /// unit norm. Panics on a zero vector or a length that is not a power of two.
    pub fn pure(amplitudes: &[Complex]) -> Self {
        let n = amplitudes.len();
        assert!(n.is_power_of_two(), "state length {n} is not a power of two");
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(norm > 0.0, "zero state vector");
        let mut mat = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                mat[(i, j)] = amplitudes[i] * amplitudes[j].conj() / (norm * norm);
            }
        }
        DensityMatrix { mat }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    /// `ρ ⊗ σ`.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            mat: cmatrix::kron(&self.mat, &other.mat),
        }
    }

    /// Convex combination `Σ p_i ρ_i`; weights are renormalized to sum to one.
    pub fn mixture(parts: &[(f64, DensityMatrix)]) -> Self {
        let total: f64 = parts.iter().map(|(p, _)| p).sum();
        let mut mat = CMatrix::zeros(parts[0].1.dim());
        for (p, rho) in parts {
            mat.add_scaled(p / total, &rho.mat);
        }
        DensityMatrix { mat }
    }
}

/// Real vector of measurement probabilities, one per scheme component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tomogram {
    pub w: Vec<f64>,
    pub scheme_label: String,
}

impl Tomogram {
    pub fn new(w: Vec<f64>, scheme_label: impl Into<String>) -> Self {
        Tomogram {
            w,
            scheme_label: scheme_label.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.w.iter().sum()
    }
}

/// `w_j = Re Tr{ρ M_j}` over a list of components, checking that the
/// discarded imaginary part is roundoff.
pub(crate) fn trace_pairings<'a>(
    rho: &CMatrix,
    components: impl IntoIterator<Item = &'a CMatrix>,
) -> Result<Vec<f64>, TomographyError> {
    components
        .into_iter()
        .enumerate()
        .map(|(index, m)| {
            let t = trace_product(rho, m)?;
            if t.im.abs() > IMAGINARY_TOL {
                return Err(TomographyError::ImaginaryResidue {
                    index: index + 1,
                    value: t.im,
                });
            }
            Ok(t.re)
        })
        .collect()
}

pub fn forward(rho: &DensityMatrix, s: &Spin12Scheme) -> Result<Tomogram, TomographyError> {
    if rho.dim() != 2 {
        return Err(TomographyError::DimensionMismatch {
            expected: 2,
            got: rho.dim(),
        });
    }
    let w = trace_pairings(rho.matrix(), s.dequantizer())?;
    Ok(Tomogram::new(w, s.label()))
}

/// `ρ = Σ_j w_j D_j`. Hermitian by construction with trace `½Σw`; positivity
/// is not enforced (see [`is_physical`]).
pub fn inverse(w: &Tomogram, s: &Spin12Scheme) -> Result<CMatrix, TomographyError> {
    combine(&w.w, s.quantizer())
}

pub(crate) fn combine(w: &[f64], components: &[CMatrix]) -> Result<CMatrix, TomographyError> {
    if w.len() != components.len() {
        return Err(TomographyError::LengthMismatch {
            expected: components.len(),
            got: w.len(),
        });
    }
    let mut rho = CMatrix::zeros(components[0].dim());
    for (wj, d) in w.iter().zip(components) {
        rho.add_scaled(*wj, d);
    }
    Ok(rho)
}

/// Outcome of the positivity and normalization conditions on `Σ_j w_j D_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalityReport {
    /// `Σ_j D_j(11) w_j` and `Σ_j D_j(22) w_j`.
    pub diagonal: [f64; 2],
    pub diagonal_ok: bool,
    /// `ρ(11)·ρ(22) − |ρ(12)|²`.
    pub determinant: f64,
    pub determinant_ok: bool,
    /// `Σ_k Tr{D_k} w_k`.
    pub normalization: f64,
    pub normalization_ok: bool,
}

impl PhysicalityReport {
    pub fn passed(&self) -> bool {
        self.diagonal_ok && self.determinant_ok && self.normalization_ok
    }
}

pub fn is_physical(
    w: &Tomogram,
    s: &Spin12Scheme,
    tol: f64,
) -> Result<PhysicalityReport, TomographyError> {
    let rho = inverse(w, s)?;
    let diagonal = [rho[(0, 0)].re, rho[(1, 1)].re];
    // Both diagonal sums non-negative, and at most one of them zero.
    let diagonal_ok = diagonal.iter().all(|&d| d >= -tol) && diagonal.iter().any(|&d| d > tol);
    let determinant = diagonal[0] * diagonal[1] - rho[(0, 1)].norm_sqr();
    let normalization: f64 = w
        .w
        .iter()
        .zip(s.quantizer())
        .map(|(wk, d)| wk * d.trace().re)
        .sum();
    Ok(PhysicalityReport {
        diagonal,
        diagonal_ok,
        determinant,
        determinant_ok: determinant >= -tol,
        normalization,
        normalization_ok: (normalization - 1.0).abs() <= tol,
    })
}

/// `Tr{ρ²}`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    trace_product(rho.matrix(), rho.matrix())
        .expect("square matrix")
        .re
}

/// Binomial success counts, one independent run of `shots` trials per
/// scheme component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub shots_per_component: u64,
    pub successes: Vec<u64>,
    pub seed: u64,
    pub scheme_label: String,
}

impl CountRecord {
    pub fn validate(&self) -> Result<(), TomographyError> {
        if self.shots_per_component == 0 {
            return Err(TomographyError::ZeroShots);
        }
        for (index, &k) in self.successes.iter().enumerate() {
            if k > self.shots_per_component {
                return Err(TomographyError::TooManySuccesses {
                    index,
                    successes: k,
                    shots: self.shots_per_component,
                });
            }
        }
        Ok(())
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let shots = self.shots_per_component as f64;
        self.successes.iter().map(|&k| k as f64 / shots).collect()
    }
}

/// Draws binomial counts for the given success probabilities.
pub fn sample_counts(
    probabilities: &[f64],
    shots: u64,
    seed: u64,
    scheme_label: &str,
) -> Result<CountRecord, TomographyError> {
    if shots == 0 {
        return Err(TomographyError::ZeroShots);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let successes = probabilities
        .iter()
        .enumerate()
        .map(|(index, &p)| {
            if !(-PROBABILITY_TOL..=1.0 + PROBABILITY_TOL).contains(&p) {
                return Err(TomographyError::ProbabilityOutOfRange { index: index + 1, value: p });
            }
            let dist = Binomial::new(shots, p.clamp(0.0, 1.0)).expect("probability in [0, 1]");
            Ok(dist.sample(&mut rng))
        })
        .collect::<Result<_, _>>()?;
    Ok(CountRecord {
        shots_per_component: shots,
        successes,
        seed,
        scheme_label: scheme_label.to_string(),
    })
}

pub fn simulate_counts(
    rho: &DensityMatrix,
    s: &Spin12Scheme,
    shots: u64,
    seed: u64,
) -> Result<CountRecord, TomographyError> {
    let w = forward(rho, s)?;
    sample_counts(&w.w, shots, seed, s.label())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    /// Distance to the reconstruction from exact probabilities, when the
    /// true state is known.
    pub frobenius_error: Option<f64>,
    pub min_eigenvalue: f64,
    pub trace: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    /// Linear-inversion estimate. May be indefinite; it is reported, never
    /// projected.
    pub rho: CMatrix,
    pub w_hat: Vec<f64>,
    pub metrics: ErrorMetrics,
}

/// Rescales frequencies so `Σŵ` equals `target_sum`. All-zero counts are
/// left as they are.
pub(crate) fn normalized_frequencies(c: &CountRecord, target_sum: f64) -> Vec<f64> {
    let f = c.frequencies();
    let total: f64 = f.iter().sum();
    if total > 0.0 {
        f.iter().map(|x| x * target_sum / total).collect()
    } else {
        f
    }
}

pub(crate) fn metrics_for(
    rho_hat: &CMatrix,
    reference: Option<&CMatrix>,
    herm_tol: f64,
) -> Result<ErrorMetrics, TomographyError> {
    let frobenius_error = reference
        .map(|r| rho_hat.frobenius_distance(r))
        .transpose()?;
    Ok(ErrorMetrics {
        frobenius_error,
        min_eigenvalue: cmatrix::min_eigenvalue(&rho_hat.hermitian_part(), herm_tol)?,
        trace: rho_hat.trace().re,
    })
}

/// Linear inversion of empirical frequencies, rescaled to `Σŵ = 2`.
pub fn estimate_state(
    c: &CountRecord,
    s: &Spin12Scheme,
    truth: Option<&DensityMatrix>,
) -> Result<Estimate, TomographyError> {
    c.validate()?;
    let w_hat = normalized_frequencies(c, 2.0);
    let rho = combine(&w_hat, s.quantizer())?;
    let reference = truth
        .map(|t| forward(t, s).and_then(|w| inverse(&w, s)))
        .transpose()?;
    let metrics = metrics_for(&rho, reference.as_ref(), s.tols().herm)?;
    Ok(Estimate { rho, w_hat, metrics })
}

/// Per-trial seed derived from the run seed and the trial index
/// (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, trial: u64) -> u64 {
    let mut z = seed ^ trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: u64,
    pub seed: u64,
    pub shots: u64,
    pub frobenius_error: f64,
    pub min_eigenvalue: f64,
    pub trace: f64,
}

/// Exact tomogram of the true state together with the map that turns
/// normalized frequencies back into a matrix.
pub struct TrialSetup<'a, E> {
    pub w: &'a [f64],
    /// Reconstruction from the exact tomogram.
    pub reference: &'a CMatrix,
    /// `Σw` for every physical state, i.e. the Hilbert-space dimension.
    pub target_sum: f64,
    pub scheme_label: &'a str,
    pub herm_tol: f64,
    pub invert: &'a (dyn Fn(&[f64]) -> Result<CMatrix, E> + Sync),
}

/// Independent simulate-and-estimate trials run in parallel, returned in
/// trial order. Trial `t` draws its counts from `derive_seed(seed, t)`.
pub fn run_trials_with<E>(
    setup: &TrialSetup<'_, E>,
    shots: u64,
    seed: u64,
    trials: u64,
) -> Result<Vec<TrialOutcome>, E>
where
    E: From<TomographyError> + Send,
{
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let trial_seed = derive_seed(seed, trial);
            let counts = sample_counts(setup.w, shots, trial_seed, setup.scheme_label)?;
            let w_hat = normalized_frequencies(&counts, setup.target_sum);
            let rho_hat = (setup.invert)(&w_hat)?;
            let m = metrics_for(&rho_hat, Some(setup.reference), setup.herm_tol)?;
            Ok(TrialOutcome {
                trial,
                seed: trial_seed,
                shots,
                frobenius_error: m.frobenius_error.expect("reference supplied"),
                min_eigenvalue: m.min_eigenvalue,
                trace: m.trace,
            })
        })
        .collect()
}

/// [`run_trials_with`] for a single-qubit scheme.
pub fn run_trials(
    rho: &DensityMatrix,
    s: &Spin12Scheme,
    shots: u64,
    seed: u64,
    trials: u64,
) -> Result<Vec<TrialOutcome>, TomographyError> {
    let w = forward(rho, s)?;
    let reference = inverse(&w, s)?;
    let invert = |w_hat: &[f64]| combine(w_hat, s.quantizer());
    let setup = TrialSetup {
        w: &w.w,
        reference: &reference,
        target_sum: 2.0,
        scheme_label: s.label(),
        herm_tol: s.tols().herm,
        invert: &invert,
    };
    run_trials_with(&setup, shots, seed, trials)
}

/// Median of a non-empty sample (mean of the two middle values for even
/// sizes).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Empirical quantile by linear interpolation between order statistics.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BlochVector;
    use crate::scheme::projector_from_bloch;

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    fn example1() -> Spin12Scheme {
        let v = BlochVector::new;
        Spin12Scheme::from_vectors(
            [v(0.0, 0.8, 0.6), v(0.8, 0.0, -0.6), v(0.0, -0.8, 0.6), v(-0.8, 0.0, -0.6)],
            "example1",
            tols(),
        )
        .unwrap()
    }

    fn assert_vec_close(got: &[f64], want: &[f64], tol: f64) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= tol, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn density_matrix_validation() {
        let c = |re| Complex::new(re, 0.0);
        assert!(DensityMatrix::new(CMatrix::from_real_diag(&[1.0, 0.0]), &tols()).is_ok());
        assert!(matches!(
            DensityMatrix::new(CMatrix::from_real_diag(&[0.5, 0.4]), &tols()),
            Err(TomographyError::TraceNotOne(_))
        ));
        assert!(matches!(
            DensityMatrix::new(CMatrix::from_real_diag(&[1.5, -0.5]), &tols()),
            Err(TomographyError::NotPositive(_))
        ));
        assert!(matches!(
            DensityMatrix::new(CMatrix::from_rows([[c(0.5), c(0.1)], [c(0.0), c(0.5)]]), &tols()),
            Err(TomographyError::NotHermitian(_))
        ));
        assert!(matches!(
            DensityMatrix::new(CMatrix::identity(3).scale(1.0 / 3.0), &tols()),
            Err(TomographyError::DimensionNotPowerOfTwo(3))
        ));
    }

    #[test]
    fn forward_examples() {
        let s = example1();
        let w = forward(&DensityMatrix::maximally_mixed(2), &s).unwrap();
        assert_vec_close(&w.w, &[0.5; 4], 1e-15);

        let up = DensityMatrix::new(CMatrix::from_real_diag(&[1.0, 0.0]), &tols()).unwrap();
        let w = forward(&up, &s).unwrap();
        assert_vec_close(&w.w, &[0.8, 0.2, 0.8, 0.2], 1e-15);

        // (1 + e1·e_j)/2 with e1·e = (1, −9/25, −7/25, −9/25)
        let u1 = projector_from_bloch(BlochVector::new(0.0, 0.8, 0.6), &tols()).unwrap();
        let rho = DensityMatrix::new(u1, &tols()).unwrap();
        let w = forward(&rho, &s).unwrap();
        assert_vec_close(&w.w, &[1.0, 8.0 / 25.0, 9.0 / 25.0, 8.0 / 25.0], 1e-15);
        assert!((w.sum() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn forward_rejects_two_qubits() {
        let err = forward(&DensityMatrix::maximally_mixed(4), &example1()).unwrap_err();
        assert_eq!(err, TomographyError::DimensionMismatch { expected: 2, got: 4 });
    }

    #[test]
    fn inverse_examples() {
        let s = example1();
        let rho = inverse(&Tomogram::new(vec![0.5; 4], "t"), &s).unwrap();
        assert!(rho.max_abs_diff(&CMatrix::identity(2).scale(0.5)).unwrap() < 1e-14);

        // D1 + D2 = ½[[1, 5/4 − 5i/4], [5/4 + 5i/4, 1]]; det = 1/4 − 25/32 < 0
        let rho = inverse(&Tomogram::new(vec![1.0, 1.0, 0.0, 0.0], "t"), &s).unwrap();
        let d = cmatrix::det(&rho).re;
        assert!((d - (0.25 - 25.0 / 32.0)).abs() < 1e-14);
        assert!(!cmatrix::is_psd(&rho, 1e-12));

        assert_eq!(
            inverse(&Tomogram::new(vec![0.5; 3], "t"), &s),
            Err(TomographyError::LengthMismatch { expected: 4, got: 3 })
        );
    }

    #[test]
    fn physicality_examples() {
        let s = example1();
        let r = is_physical(&Tomogram::new(vec![0.5; 4], "t"), &s, 1e-10).unwrap();
        assert!(r.passed());

        let r = is_physical(&Tomogram::new(vec![1.0, 1.0, 0.0, 0.0], "t"), &s, 1e-10).unwrap();
        assert!(!r.determinant_ok);
        assert!(!r.passed());

        let pure = DensityMatrix::pure(&[Complex::new(0.6, 0.0), Complex::new(0.0, 0.8)]);
        let r = is_physical(&forward(&pure, &s).unwrap(), &s, 1e-10).unwrap();
        assert!(r.passed());
        assert!(r.determinant.abs() <= 1e-12);
    }

    #[test]
    fn purity_examples() {
        assert!((purity(&DensityMatrix::maximally_mixed(2)) - 0.5).abs() < 1e-15);
        let pure = DensityMatrix::pure(&[Complex::new(1.0, 0.0), Complex::new(1.0, 1.0)]);
        assert!((purity(&pure) - 1.0).abs() < 1e-15);
        let u = projector_from_bloch(BlochVector::new(0.0, -2.0 / 3.0, 1.0 / 3.0), &tols()).unwrap();
        let rho = DensityMatrix::new(u, &tols()).unwrap();
        assert!((purity(&rho) - 7.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn counts_for_certain_outcome() {
        let s = example1();
        let rho = DensityMatrix::new(s.dequantizer()[0].clone(), &tols()).unwrap();
        let c = simulate_counts(&rho, &s, 1000, 5).unwrap();
        assert_eq!(c.successes[0], 1000);
        assert_eq!(c, simulate_counts(&rho, &s, 1000, 5).unwrap());
    }

    #[test]
    fn counts_concentrate() {
        let s = example1();
        let c = simulate_counts(&DensityMatrix::maximally_mixed(2), &s, 1_000_000, 11).unwrap();
        for f in c.frequencies() {
            assert!((f - 0.5).abs() < 5e-3);
        }
    }

    #[test]
    fn sampler_rejects_bad_probabilities() {
        assert_eq!(
            sample_counts(&[0.5, 1.1], 10, 0, "x"),
            Err(TomographyError::ProbabilityOutOfRange { index: 2, value: 1.1 })
        );
        assert_eq!(sample_counts(&[0.5], 0, 0, "x"), Err(TomographyError::ZeroShots));
        // roundoff just past the unit interval is clamped
        assert!(sample_counts(&[1.0 + 1e-12, -1e-12], 10, 0, "x").is_ok());
    }

    #[test]
    fn exact_frequencies_invert_exactly() {
        let s = example1();
        let rho = DensityMatrix::pure(&[Complex::new(0.6, 0.0), Complex::new(0.0, 0.8)]);
        let w = forward(&rho, &s).unwrap();
        let shots = 1_000_000_000u64;
        let c = CountRecord {
            shots_per_component: shots,
            successes: w.w.iter().map(|p| (p * shots as f64).round() as u64).collect(),
            seed: 0,
            scheme_label: "example1".into(),
        };
        let est = estimate_state(&c, &s, Some(&rho)).unwrap();
        assert!(est.metrics.frobenius_error.unwrap() < 10.0 / shots as f64);
        assert!((est.metrics.trace - 1.0).abs() < 1e-14);
    }

    #[test]
    fn estimate_rejects_inconsistent_counts() {
        let c = CountRecord {
            shots_per_component: 10,
            successes: vec![11, 0, 0, 0],
            seed: 0,
            scheme_label: "x".into(),
        };
        assert!(matches!(
            estimate_state(&c, &example1(), None),
            Err(TomographyError::TooManySuccesses { .. })
        ));
    }

    #[test]
    fn trials_are_ordered_and_reproducible() {
        let s = example1();
        let rho = DensityMatrix::maximally_mixed(2);
        let a = run_trials(&rho, &s, 500, 3, 16).unwrap();
        let b = run_trials(&rho, &s, 500, 3, 16).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().enumerate().all(|(i, t)| t.trial == i as u64));
        assert_ne!(a[0].seed, a[1].seed);
    }

    #[test]
    fn median_and_quantiles() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(quantile(&[0.0, 10.0], 0.25), 2.5);
    }
}
