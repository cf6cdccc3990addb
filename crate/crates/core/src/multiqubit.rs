//! Tensor-product schemes for N qubits (spin `(2^N − 1)/2`).
//!
//! Component `j` of the composite scheme is `U^(1)_{j₁} ⊗ … ⊗ U^(N)_{j_N}`
//! with `(j₁, …, j_N) = f⁻¹(j)`. Both index maps are big-endian and
//! 1-based: `g` splits a level index `k ∈ 1..2^N` into per-qubit spin
//! indices, `f` joins per-qubit component indices into `j ∈ 1..4^N`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cmatrix::{self, trace_product, CMatrix, Complex, LinalgError};
use crate::scheme::{Check, Spin12Scheme};
use crate::tomography::{self, DensityMatrix, Tomogram, TomographyError, TrialOutcome, TrialSetup};

/// Largest N for which composite components are built as dense matrices.
pub const DEFAULT_MATERIALIZE_LIMIT: usize = 5;
/// Default number of random `(j, j')` pairs and spin-index tuples in sampled
/// verification.
pub const DEFAULT_SAMPLES: usize = 1000;
/// Bound on every tensor identity residual.
pub const TENSOR_TOL: f64 = 1e-10;
/// Largest N accepted for exhaustive verification.
pub const EXHAUSTIVE_MAX_N: usize = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MultiqubitError {
    #[error("a tensor scheme needs at least one factor")]
    NoFactors,
    #[error("index {index} outside 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("index tuple has {got} entries, expected {expected}")]
    TupleLength { expected: usize, got: usize },
    #[error("entry {position} of index tuple is {value}, expected 1..={base}")]
    DigitOutOfRange { position: usize, value: usize, base: usize },
    #[error("N = {n} exceeds the materialization limit {limit}")]
    MaterializeLimitExceeded { n: usize, limit: usize },
    #[error("exhaustive verification is limited to N <= {EXHAUSTIVE_MAX_N}, got N = {0}")]
    ExhaustiveTooLarge(usize),
    #[error("N = {0} is too large for this machine word")]
    TooManyQubits(usize),
    #[error(transparent)]
    Tomography(#[from] TomographyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn checked_pow(base: usize, n: usize) -> Result<usize, MultiqubitError> {
    u32::try_from(n)
        .ok()
        .and_then(|n| base.checked_pow(n))
        .ok_or(MultiqubitError::TooManyQubits(n))
}

fn split_digits(index: usize, n: usize, base: usize) -> Result<Vec<usize>, MultiqubitError> {
    let max = checked_pow(base, n)?;
    if index == 0 || index > max {
        return Err(MultiqubitError::IndexOutOfRange { index, max });
    }
    let mut rest = index - 1;
    let mut digits = vec![0; n];
    for d in digits.iter_mut().rev() {
        *d = rest % base + 1;
        rest /= base;
    }
    Ok(digits)
}

fn join_digits(digits: &[usize], base: usize) -> Result<usize, MultiqubitError> {
    checked_pow(base, digits.len())?;
    let mut index = 0;
    for (position, &value) in digits.iter().enumerate() {
        if value == 0 || value > base {
            return Err(MultiqubitError::DigitOutOfRange { position, value, base });
        }
        index = index * base + (value - 1);
    }
    Ok(index + 1)
}

/// `k ∈ 1..=2^N` to spin indices `(k₁, …, k_N)`, each in `1..=2`.
pub fn g_map(k: usize, n: usize) -> Result<Vec<usize>, MultiqubitError> {
    split_digits(k, n, 2)
}

pub fn g_inv(ks: &[usize]) -> Result<usize, MultiqubitError> {
    join_digits(ks, 2)
}

/// `(j₁, …, j_N)`, each in `1..=4`, to `j ∈ 1..=4^N`.
pub fn f_map(js: &[usize]) -> Result<usize, MultiqubitError> {
    join_digits(js, 4)
}

pub fn f_inv(j: usize, n: usize) -> Result<Vec<usize>, MultiqubitError> {
    split_digits(j, n, 4)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Dequantizer,
    Quantizer,
}

/// N single-qubit schemes composed by Kronecker products. Factors may
/// differ from one another.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorScheme {
    factors: Vec<Spin12Scheme>,
    materialize_limit: usize,
}

impl TensorScheme {
    pub fn new(factors: Vec<Spin12Scheme>) -> Result<Self, MultiqubitError> {
        if factors.is_empty() {
            return Err(MultiqubitError::NoFactors);
        }
        checked_pow(4, factors.len())?;
        Ok(TensorScheme {
            factors,
            materialize_limit: DEFAULT_MATERIALIZE_LIMIT,
        })
    }

    /// `n` copies of one scheme.
    pub fn replicate(factor: &Spin12Scheme, n: usize) -> Result<Self, MultiqubitError> {
        Self::new(vec![factor.clone(); n])
    }

    pub fn with_materialize_limit(mut self, limit: usize) -> Self {
        self.materialize_limit = limit;
        self
    }

    pub fn factors(&self) -> &[Spin12Scheme] {
        &self.factors
    }

    pub fn n_qubits(&self) -> usize {
        self.factors.len()
    }

    /// `2^N`.
    pub fn dim(&self) -> usize {
        1 << self.n_qubits()
    }

    /// `4^N`.
    pub fn len(&self) -> usize {
        1 << (2 * self.n_qubits())
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn materialize_limit(&self) -> usize {
        self.materialize_limit
    }

    pub fn can_materialize(&self) -> bool {
        self.n_qubits() <= self.materialize_limit
    }

    pub fn label(&self) -> String {
        self.factors
            .iter()
            .map(Spin12Scheme::label)
            .collect::<Vec<_>>()
            .join("⊗")
    }

    fn factor_parts(&self, i: usize, which: Which) -> &[CMatrix; 4] {
        match which {
            Which::Dequantizer => self.factors[i].dequantizer(),
            Which::Quantizer => self.factors[i].quantizer(),
        }
    }

    fn check_materialize(&self) -> Result<(), MultiqubitError> {
        if self.can_materialize() {
            Ok(())
        } else {
            Err(MultiqubitError::MaterializeLimitExceeded {
                n: self.n_qubits(),
                limit: self.materialize_limit,
            })
        }
    }

    /// Dense `𝔘_j` or `𝔇_j` for 1-based `j`.
    pub fn tensor_component(&self, j: usize, which: Which) -> Result<CMatrix, MultiqubitError> {
        self.check_materialize()?;
        let js = f_inv(j, self.n_qubits())?;
        let parts = js
            .iter()
            .enumerate()
            .map(|(i, &ji)| &self.factor_parts(i, which)[ji - 1]);
        Ok(cmatrix::kron_all(parts).expect("at least one factor"))
    }

    /// All `4^N` dense components in index order.
    pub fn components(&self, which: Which) -> Result<Vec<CMatrix>, MultiqubitError> {
        self.check_materialize()?;
        (1..=self.len())
            .into_par_iter()
            .map(|j| self.tensor_component(j, which))
            .collect()
    }

    /// Product of per-factor scalars `Π_i x_i[j_i]` for 1-based `j`.
    fn factored_product(&self, j: usize, per_factor: &[[Complex; 4]]) -> Result<Complex, MultiqubitError> {
        let js = f_inv(j, self.n_qubits())?;
        Ok(js
            .iter()
            .zip(per_factor)
            .map(|(&ji, x)| x[ji - 1])
            .product())
    }
}

fn check_dim(rho: &CMatrix, ts: &TensorScheme) -> Result<(), MultiqubitError> {
    if rho.dim() != ts.dim() {
        return Err(TomographyError::DimensionMismatch {
            expected: ts.dim(),
            got: rho.dim(),
        }
        .into());
    }
    Ok(())
}

/// `w_j = Tr{ρ𝔘_j}` by contracting one qubit at a time; no composite
/// component is formed.
pub fn forward_factored(rho: &CMatrix, ts: &TensorScheme) -> Result<Vec<f64>, MultiqubitError> {
    check_dim(rho, ts)?;
    // t is laid out as [prefix of contracted indices][row rest][col rest].
    let mut t = rho.as_slice().to_vec();
    let mut prefixes = 1usize;
    let mut side = ts.dim();
    for i in 0..ts.n_qubits() {
        let u = ts.factor_parts(i, Which::Dequantizer);
        let half = side / 2;
        let block = side * side;
        let new_block = half * half;
        let mut next = vec![Complex::new(0.0, 0.0); prefixes * 4 * new_block];
        for p in 0..prefixes {
            let src = &t[p * block..(p + 1) * block];
            for (j, uj) in u.iter().enumerate() {
                let dst = &mut next[(p * 4 + j) * new_block..(p * 4 + j + 1) * new_block];
                for r1 in 0..2 {
                    for c1 in 0..2 {
                        let coef = uj[(c1, r1)];
                        for r in 0..half {
                            let row = &src[(r1 * half + r) * side + c1 * half..][..half];
                            for (c, x) in row.iter().enumerate() {
                                dst[r * half + c] += coef * x;
                            }
                        }
                    }
                }
            }
        }
        t = next;
        prefixes *= 4;
        side = half;
    }
    t.iter()
        .enumerate()
        .map(|(index, z)| {
            if z.im.abs() > tomography::IMAGINARY_TOL {
                Err(TomographyError::ImaginaryResidue { index: index + 1, value: z.im }.into())
            } else {
                Ok(z.re)
            }
        })
        .collect()
}

/// `ρ = Σ_j w_j 𝔇_j` by expanding one qubit at a time, last factor first.
pub fn inverse_factored(w: &[f64], ts: &TensorScheme) -> Result<CMatrix, MultiqubitError> {
    if w.len() != ts.len() {
        return Err(TomographyError::LengthMismatch {
            expected: ts.len(),
            got: w.len(),
        }
        .into());
    }
    let mut t: Vec<Complex> = w.iter().map(|&x| Complex::new(x, 0.0)).collect();
    let mut prefixes = ts.len();
    let mut side = 1usize;
    for i in (0..ts.n_qubits()).rev() {
        let d = ts.factor_parts(i, Which::Quantizer);
        prefixes /= 4;
        let block = side * side;
        let wide = 2 * side;
        let mut next = vec![Complex::new(0.0, 0.0); prefixes * wide * wide];
        for p in 0..prefixes {
            let dst = &mut next[p * wide * wide..(p + 1) * wide * wide];
            for (j, dj) in d.iter().enumerate() {
                let src = &t[(p * 4 + j) * block..(p * 4 + j + 1) * block];
                for r1 in 0..2 {
                    for c1 in 0..2 {
                        let coef = dj[(r1, c1)];
                        for r in 0..side {
                            let out = &mut dst[(r1 * side + r) * wide + c1 * side..][..side];
                            for (o, x) in out.iter_mut().zip(&src[r * side..(r + 1) * side]) {
                                *o += coef * x;
                            }
                        }
                    }
                }
            }
        }
        t = next;
        side = wide;
    }
    Ok(CMatrix::from_vec(side, t)?)
}

/// `w_j = Tr{ρ𝔘_j}`. Uses dense components up to the materialization
/// limit, factored contraction beyond it.
pub fn forward_n(rho: &DensityMatrix, ts: &TensorScheme) -> Result<Tomogram, MultiqubitError> {
    check_dim(rho.matrix(), ts)?;
    let w = if ts.can_materialize() {
        let u = ts.components(Which::Dequantizer)?;
        tomography::trace_pairings(rho.matrix(), &u)?
    } else {
        forward_factored(rho.matrix(), ts)?
    };
    Ok(Tomogram::new(w, ts.label()))
}

/// Forward map of `ρ₁ ⊗ … ⊗ ρ_N` from per-factor tomograms:
/// `w_{f(j₁…j_N)} = Π_i w^(i)_{j_i}`.
pub fn forward_separable(parts: &[DensityMatrix], ts: &TensorScheme) -> Result<Tomogram, MultiqubitError> {
    if parts.len() != ts.n_qubits() {
        return Err(MultiqubitError::TupleLength {
            expected: ts.n_qubits(),
            got: parts.len(),
        });
    }
    let per_factor = parts
        .iter()
        .zip(ts.factors())
        .map(|(rho, s)| {
            let w = tomography::forward(rho, s)?.w;
            Ok(std::array::from_fn(|k| Complex::new(w[k], 0.0)))
        })
        .collect::<Result<Vec<[Complex; 4]>, MultiqubitError>>()?;
    let w = (1..=ts.len())
        .map(|j| ts.factored_product(j, &per_factor).map(|z| z.re))
        .collect::<Result<_, _>>()?;
    Ok(Tomogram::new(w, ts.label()))
}

/// `ρ = Σ_j w_j 𝔇_j`, an unvalidated candidate.
pub fn inverse_n(w: &Tomogram, ts: &TensorScheme) -> Result<CMatrix, MultiqubitError> {
    if ts.can_materialize() {
        let d = ts.components(Which::Quantizer)?;
        Ok(tomography::combine(&w.w, &d)?)
    } else {
        inverse_factored(&w.w, ts)
    }
}

/// Finite-shot trials against an N-qubit state; see
/// [`tomography::run_trials_with`].
pub fn run_trials_n(
    rho: &DensityMatrix,
    ts: &TensorScheme,
    shots: u64,
    seed: u64,
    trials: u64,
) -> Result<Vec<TrialOutcome>, MultiqubitError> {
    let w = forward_n(rho, ts)?;
    let reference = inverse_n(&w, ts)?;
    let label = ts.label();
    let quantizer = if ts.can_materialize() {
        Some(ts.components(Which::Quantizer)?)
    } else {
        None
    };
    let invert = |w_hat: &[f64]| -> Result<CMatrix, MultiqubitError> {
        match &quantizer {
            Some(d) => Ok(tomography::combine(w_hat, d)?),
            None => inverse_factored(w_hat, ts),
        }
    };
    let setup = TrialSetup {
        w: &w.w,
        reference: &reference,
        target_sum: ts.dim() as f64,
        scheme_label: &label,
        herm_tol: ts.factors()[0].tols().herm,
        invert: &invert,
    };
    tomography::run_trials_with(&setup, shots, seed, trials)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum VerifyMode {
    /// Every `(j, j')` pair and every spin-index tuple. N ≤ 2 only.
    Exhaustive,
    /// `samples` random pairs and tuples drawn from `seed`.
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorReport {
    pub n_qubits: usize,
    pub label: String,
    pub mode: VerifyMode,
    pub pairs_checked: usize,
    /// Largest `|Tr{𝔘_j 𝔇_j'} − δ_jj'|`.
    pub orthogonality_residual: f64,
    pub tuples_checked: usize,
    /// Largest `|Σ_j 𝔘_j(kl) 𝔇_j(l'k') − δ_kk' δ_ll'|`.
    pub completeness_residual: f64,
    /// `‖Σ_j 𝔘_j − 2^N E‖_max`.
    pub sum_u_residual: f64,
    /// `‖Σ_j 𝔇_j − E‖_max`.
    pub sum_d_residual: f64,
    /// Largest `|Tr 𝔘_j − 1|`.
    pub trace_u_residual: f64,
    /// Largest `|Tr 𝔇_j − 2^−N|`.
    pub trace_d_residual: f64,
}

impl TensorReport {
    pub fn checks(&self, tol: f64) -> Vec<Check> {
        vec![
            Check::at_most("orthogonality", self.orthogonality_residual, tol),
            Check::at_most("completeness", self.completeness_residual, tol),
            Check::at_most("sum of dequantizers", self.sum_u_residual, tol),
            Check::at_most("sum of quantizers", self.sum_d_residual, tol),
            Check::at_most("dequantizer traces", self.trace_u_residual, tol),
            Check::at_most("quantizer traces", self.trace_d_residual, tol),
        ]
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.checks(tol).iter().all(|c| c.passed)
    }
}

fn max_par(values: impl ParallelIterator<Item = f64>) -> f64 {
    values.reduce(|| 0.0, f64::max)
}

pub fn verify_tensor_identities(ts: &TensorScheme, mode: VerifyMode) -> Result<TensorReport, MultiqubitError> {
    let n = ts.n_qubits();
    if mode == VerifyMode::Exhaustive && n > EXHAUSTIVE_MAX_N {
        return Err(MultiqubitError::ExhaustiveTooLarge(n));
    }
    let u = ts.components(Which::Dequantizer)?;
    let d = ts.components(Which::Quantizer)?;
    let len = ts.len();
    let dim = ts.dim();

    let (pairs, tuples): (Vec<(usize, usize)>, Vec<[usize; 4]>) = match mode {
        VerifyMode::Exhaustive => (
            (0..len).flat_map(|j| (0..len).map(move |k| (j, k))).collect(),
            (0..dim.pow(4))
                .map(|x| [x % dim, (x / dim) % dim, (x / dim / dim) % dim, x / dim / dim / dim])
                .collect(),
        ),
        VerifyMode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // Half the pairs are diagonal so the δ = 1 branch is exercised.
            let pairs = (0..samples)
                .map(|i| {
                    let j = rng.random_range(0..len);
                    let k = if i % 2 == 0 { j } else { rng.random_range(0..len) };
                    (j, k)
                })
                .collect();
            let tuples = (0..samples)
                .map(|i| {
                    let mut t: [usize; 4] = std::array::from_fn(|_| rng.random_range(0..dim));
                    if i % 2 == 0 {
                        t[2] = t[0];
                        t[3] = t[1];
                    }
                    t
                })
                .collect();
            (pairs, tuples)
        }
    };

    let orthogonality_residual = max_par(pairs.par_iter().map(|&(j, k)| {
        let t = trace_product(&u[j], &d[k]).expect("matching dimensions");
        let want = if j == k { 1.0 } else { 0.0 };
        (t - Complex::new(want, 0.0)).norm()
    }));
    let completeness_residual = max_par(tuples.par_iter().map(|&[k, l, kp, lp]| {
        let s: Complex = u.iter().zip(&d).map(|(uj, dj)| uj[(k, l)] * dj[(lp, kp)]).sum();
        let want = if k == kp && l == lp { 1.0 } else { 0.0 };
        (s - Complex::new(want, 0.0)).norm()
    }));

    let sum = |m: &[CMatrix]| {
        let mut acc = CMatrix::zeros(dim);
        for x in m {
            acc += x;
        }
        acc
    };
    let sum_u_residual = sum(&u).max_abs_diff(&CMatrix::identity(dim).scale(dim as f64))?;
    let sum_d_residual = sum(&d).max_abs_diff(&CMatrix::identity(dim))?;
    let trace_residual = |m: &[CMatrix], want: f64| {
        m.iter()
            .map(|x| (x.trace() - Complex::new(want, 0.0)).norm())
            .fold(0.0, f64::max)
    };

    Ok(TensorReport {
        n_qubits: n,
        label: ts.label(),
        mode,
        pairs_checked: pairs.len(),
        orthogonality_residual,
        tuples_checked: tuples.len(),
        completeness_residual,
        sum_u_residual,
        sum_d_residual,
        trace_u_residual: trace_residual(&u, 1.0),
        trace_d_residual: trace_residual(&d, 1.0 / dim as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BlochVector;
    use crate::scheme::{orthogonality_residual, scheme_diagnostics};
    use crate::states;
    use crate::tolerance::Tolerances;

    fn v(a: f64, b: f64, c: f64) -> BlochVector {
        BlochVector::new(a, b, c)
    }

    fn example1() -> Spin12Scheme {
        Spin12Scheme::from_vectors(
            [v(0.0, 0.8, 0.6), v(0.8, 0.0, -0.6), v(0.0, -0.8, 0.6), v(-0.8, 0.0, -0.6)],
            "example1",
            Tolerances::default(),
        )
        .unwrap()
    }

    fn example2() -> Spin12Scheme {
        let t = 1.0 / 3.0;
        Spin12Scheme::from_vectors(
            [v(0.0, -2.0 * t, t), v(2.0 * t, 0.0, -t), v(0.0, 2.0 * t, t), v(-2.0 * t, 0.0, -t)],
            "example2",
            Tolerances::default(),
        )
        .unwrap()
    }

    #[test]
    fn index_map_examples() {
        assert_eq!(g_map(1, 2).unwrap(), vec![1, 1]);
        assert_eq!(g_map(3, 2).unwrap(), vec![2, 1]);
        assert_eq!(f_map(&[1, 1]).unwrap(), 1);
        assert_eq!(f_map(&[2, 3]).unwrap(), 7);
        assert_eq!(f_inv(7, 2).unwrap(), vec![2, 3]);
    }

    #[test]
    fn index_maps_are_bijections() {
        for n in 1..=4 {
            let mut seen = vec![false; 1 << (2 * n)];
            for j in 1..=(1 << (2 * n)) {
                let js = f_inv(j, n).unwrap();
                assert_eq!(f_map(&js).unwrap(), j);
                assert!(!std::mem::replace(&mut seen[j - 1], true));
            }
            for k in 1..=(1 << n) {
                assert_eq!(g_inv(&g_map(k, n).unwrap()).unwrap(), k);
            }
        }
    }

    #[test]
    fn index_maps_reject_out_of_range() {
        assert_eq!(g_map(0, 2), Err(MultiqubitError::IndexOutOfRange { index: 0, max: 4 }));
        assert_eq!(f_inv(17, 2), Err(MultiqubitError::IndexOutOfRange { index: 17, max: 16 }));
        assert_eq!(
            f_map(&[1, 5]),
            Err(MultiqubitError::DigitOutOfRange { position: 1, value: 5, base: 4 })
        );
        assert!(matches!(g_inv(&[3]), Err(MultiqubitError::DigitOutOfRange { .. })));
    }

    #[test]
    fn g_matches_kron_layout() {
        // Basis projector |k⟩⟨k| is the Kronecker product of per-qubit projectors |k_i⟩⟨k_i|.
        let n = 3;
        for k in 1..=8 {
            let ks = g_map(k, n).unwrap();
            let parts: Vec<CMatrix> = ks
                .iter()
                .map(|&ki| {
                    let mut d = [0.0; 2];
                    d[ki - 1] = 1.0;
                    CMatrix::from_real_diag(&d)
                })
                .collect();
            let m = cmatrix::kron_all(&parts).unwrap();
            assert_eq!(m[(k - 1, k - 1)].re, 1.0);
            assert!((m.trace().re - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn single_factor_is_the_factor() {
        let s = example1();
        let ts = TensorScheme::replicate(&s, 1).unwrap();
        for j in 1..=4 {
            assert_eq!(ts.tensor_component(j, Which::Dequantizer).unwrap(), s.dequantizer()[j - 1]);
            assert_eq!(ts.tensor_component(j, Which::Quantizer).unwrap(), s.quantizer()[j - 1]);
        }
        let r = verify_tensor_identities(&ts, VerifyMode::Exhaustive).unwrap();
        let diag = scheme_diagnostics(&s);
        assert_eq!(r.orthogonality_residual, diag.orthogonality_residual);
        assert_eq!(
            r.orthogonality_residual,
            orthogonality_residual(s.dequantizer(), s.quantizer())
        );
    }

    #[test]
    fn two_qubit_component_and_traces() {
        let s = example1();
        let ts = TensorScheme::replicate(&s, 2).unwrap();
        let u1 = ts.tensor_component(1, Which::Dequantizer).unwrap();
        assert_eq!(u1, cmatrix::kron(&s.dequantizer()[0], &s.dequantizer()[0]));
        assert!((u1.trace().re - 1.0).abs() < 1e-15);
        for j in 1..=16 {
            let d = ts.tensor_component(j, Which::Quantizer).unwrap();
            assert!((d.trace() - Complex::new(0.25, 0.0)).norm() < 1e-15);
        }
        assert!(matches!(
            ts.tensor_component(17, Which::Quantizer),
            Err(MultiqubitError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn materialize_limit_is_enforced() {
        let ts = TensorScheme::replicate(&example1(), 3).unwrap().with_materialize_limit(2);
        assert_eq!(
            ts.tensor_component(1, Which::Dequantizer),
            Err(MultiqubitError::MaterializeLimitExceeded { n: 3, limit: 2 })
        );
    }

    #[test]
    fn exhaustive_mixed_factors() {
        let ts = TensorScheme::new(vec![example1(), example2()]).unwrap();
        let r = verify_tensor_identities(&ts, VerifyMode::Exhaustive).unwrap();
        assert_eq!(r.pairs_checked, 256);
        assert_eq!(r.tuples_checked, 256);
        assert!(r.passed(TENSOR_TOL), "{r:?}");
    }

    #[test]
    fn sampled_three_qubits() {
        let ts = TensorScheme::new(vec![example1(), example2(), example1()]).unwrap();
        let r = verify_tensor_identities(&ts, VerifyMode::Sampled { samples: DEFAULT_SAMPLES, seed: 9 }).unwrap();
        assert_eq!(r.pairs_checked, 1000);
        assert!(r.passed(TENSOR_TOL), "{r:?}");
        assert_eq!(
            verify_tensor_identities(&ts, VerifyMode::Exhaustive),
            Err(MultiqubitError::ExhaustiveTooLarge(3))
        );
    }

    #[test]
    fn maximally_mixed_forward_and_inverse() {
        let ts = TensorScheme::replicate(&example2(), 2).unwrap();
        let w = forward_n(&DensityMatrix::maximally_mixed(4), &ts).unwrap();
        assert!(w.w.iter().all(|x| (x - 0.25).abs() < 1e-15));
        let rho = inverse_n(&Tomogram::new(vec![0.25; 16], "t"), &ts).unwrap();
        assert!(rho.max_abs_diff(&CMatrix::identity(4).scale(0.25)).unwrap() < 1e-14);
    }

    #[test]
    fn separable_forward_factorizes() {
        let ts = TensorScheme::new(vec![example1(), example2()]).unwrap();
        let a = states::qubit_state(v(0.3, -0.2, 0.5));
        let b = states::qubit_state(v(0.0, 0.6, -0.8));
        let dense = forward_n(&a.tensor(&b), &ts).unwrap();
        let wa = tomography::forward(&a, &ts.factors()[0]).unwrap();
        let wb = tomography::forward(&b, &ts.factors()[1]).unwrap();
        for j1 in 1..=4 {
            for j2 in 1..=4 {
                let j = f_map(&[j1, j2]).unwrap();
                assert!((dense.w[j - 1] - wa.w[j1 - 1] * wb.w[j2 - 1]).abs() < 1e-15);
            }
        }
        let sep = forward_separable(&[a, b], &ts).unwrap();
        for (x, y) in sep.w.iter().zip(&dense.w) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn bell_round_trip() {
        let ts = TensorScheme::replicate(&example1(), 2).unwrap();
        let bell = states::bell_state();
        let w = forward_n(&bell, &ts).unwrap();
        assert!((w.sum() - 4.0).abs() < 1e-12);
        let back = inverse_n(&w, &ts).unwrap();
        assert!(back.frobenius_distance(bell.matrix()).unwrap() < 1e-12);
    }

    #[test]
    fn factored_paths_match_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ts = TensorScheme::new(vec![example1(), example2(), example2()]).unwrap();
        let rho = states::random_mixed_state(&mut rng, 8);
        let dense = forward_n(&rho, &ts).unwrap();
        let fact = forward_factored(rho.matrix(), &ts).unwrap();
        for (x, y) in dense.w.iter().zip(&fact) {
            assert!((x - y).abs() < 1e-14);
        }
        let a = inverse_n(&dense, &ts).unwrap();
        let b = inverse_factored(&dense.w, &ts).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-14);
        assert!(b.frobenius_distance(rho.matrix()).unwrap() < 1e-12);
    }

    #[test]
    fn beyond_limit_uses_factored_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ts = TensorScheme::replicate(&example1(), 3).unwrap().with_materialize_limit(1);
        let rho = states::ghz_state(3);
        let w = forward_n(&rho, &ts).unwrap();
        assert!((w.sum() - 8.0).abs() < 1e-12);
        let back = inverse_n(&w, &ts).unwrap();
        assert!(back.frobenius_distance(rho.matrix()).unwrap() < 1e-12);
        let sigma = states::random_pure_state(&mut rng, 8);
        let back = inverse_n(&forward_n(&sigma, &ts).unwrap(), &ts).unwrap();
        assert!(back.frobenius_distance(sigma.matrix()).unwrap() < 1e-12);
    }

    #[test]
    fn trials_on_two_qubits() {
        let ts = TensorScheme::replicate(&example1(), 2).unwrap();
        let rho = states::bell_state();
        let small = run_trials_n(&rho, &ts, 100, 1, 20).unwrap();
        let large = run_trials_n(&rho, &ts, 100_000, 1, 20).unwrap();
        let med = |t: &[TrialOutcome]| tomography::median(&t.iter().map(|x| x.frobenius_error).collect::<Vec<_>>());
        assert!(med(&large) < med(&small) / 10.0);
        assert!(large.iter().all(|t| (t.trace - 1.0).abs() < 1e-12));
        let factored = run_trials_n(&rho, &ts.clone().with_materialize_limit(1), 100, 1, 20).unwrap();
        for (a, b) in small.iter().zip(&factored) {
            assert!((a.frobenius_error - b.frobenius_error).abs() < 1e-12);
        }
    }

    #[test]
    fn forward_checks_dimension() {
        let ts = TensorScheme::replicate(&example1(), 2).unwrap();
        assert!(matches!(
            forward_n(&DensityMatrix::maximally_mixed(2), &ts),
            Err(MultiqubitError::Tomography(TomographyError::DimensionMismatch { expected: 4, got: 2 }))
        ));
        assert!(matches!(
            inverse_n(&Tomogram::new(vec![0.0; 4], "t"), &ts),
            Err(MultiqubitError::Tomography(TomographyError::LengthMismatch { expected: 16, got: 4 }))
        ));
        assert_eq!(TensorScheme::new(vec![]), Err(MultiqubitError::NoFactors));
    }
}
