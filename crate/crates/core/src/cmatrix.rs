//! Dense complex square matrices sized for spin-1/2 and few-qubit work.
//!
//! Everything here is small (dimension at most 64), row-major and owned.
//! Eigenvalues of Hermitian matrices come from two independent routes: a
//! closed form for 2×2 blocks and cyclic Jacobi rotations for the general
//! case.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use thiserror::Error;

pub use num_complex::Complex64 as Complex;

/// Default element-wise tolerance for Hermiticity checks.
pub const DEFAULT_HERM_TOL: f64 = 1e-10;

/// Largest dimension accepted by [`eig_hermitian`].
pub const MAX_EIG_DIM: usize = 64;

const MAX_JACOBI_SWEEPS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("expected {expected} entries for a square matrix, got {got}")]
    BadLength { expected: usize, got: usize },
    #[error("matrix dimension must be positive")]
    EmptyMatrix,
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is not Hermitian (max |A - A†| = {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("dimension {0} exceeds the eigensolver limit of {MAX_EIG_DIM}")]
    TooLarge(usize),
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
    #[error("spinor norm² is {0}, expected 1")]
    NotNormalized(f64),
}

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        CMatrix {
            dim,
            data: vec![Complex::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn from_vec(dim: usize, data: Vec<Complex>) -> Result<Self, LinalgError> {
        if dim == 0 {
            return Err(LinalgError::EmptyMatrix);
        }
        if data.len() != dim * dim {
            return Err(LinalgError::BadLength {
                expected: dim * dim,
                got: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(LinalgError::NonFinite {
                row: pos / dim,
                col: pos % dim,
            });
        }
        Ok(CMatrix { dim, data })
    }

    /// Builds a matrix from nested rows. Panics if the rows are ragged; meant
    /// for literals in code and tests.
    pub fn from_rows<const N: usize>(rows: [[Complex; N]; N]) -> Self {
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::from_vec(N, data).expect("finite literal matrix")
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(d, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|z| z * factor)
    }

    pub fn scale_complex(&self, factor: Complex) -> Self {
        self.map(|z| z * factor)
    }

    fn map(&self, f: impl Fn(Complex) -> Complex) -> Self {
        CMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, factor: f64, other: &CMatrix) {
        assert_eq!(self.dim, other.dim, "add_scaled: dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * factor;
        }
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix, LinalgError> {
        check_same_dim(self, other)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == Complex::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        Ok(out)
    }

    /// Largest element-wise modulus of `A - A†`.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_residual() <= tol
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> Result<f64, LinalgError> {
        check_same_dim(self, other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn frobenius_distance(&self, other: &CMatrix) -> Result<f64, LinalgError> {
        check_same_dim(self, other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Replaces the matrix by `(A + A†)/2`, removing roundoff asymmetry.
    pub fn hermitian_part(&self) -> CMatrix {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
            }
        }
        out
    }
}

fn check_same_dim(a: &CMatrix, b: &CMatrix) -> Result<(), LinalgError> {
    if a.dim != b.dim {
        return Err(LinalgError::DimensionMismatch {
            left: a.dim,
            right: b.dim,
        });
    }
    Ok(())
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex;

    fn index(&self, (r, c): (usize, usize)) -> &Complex {
        assert!(r < self.dim && c < self.dim, "index ({r}, {c}) out of bounds");
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex {
        assert!(r < self.dim && c < self.dim, "index ({r}, {c}) out of bounds");
        &mut self.data[r * self.dim + c]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "add: dimension mismatch");
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        self.add_scaled(1.0, rhs);
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "sub: dimension mismatch");
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;

    fn neg(self) -> CMatrix {
        self.map(|z| -z)
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs).expect("mul: dimension mismatch")
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:>10.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// `Tr{AB} = Σ_{k,l} A_kl B_lk`, computed without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Result<Complex, LinalgError> {
    check_same_dim(a, b)?;
    let n = a.dim;
    let mut acc = Complex::new(0.0, 0.0);
    for k in 0..n {
        for l in 0..n {
            acc += a.data[k * n + l] * b.data[l * n + k];
        }
    }
    Ok(acc)
}

/// Kronecker product with the big-endian layout
/// `(A⊗B)[i·dB + k, j·dB + l] = A[i,j]·B[k,l]`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (na, nb) = (a.dim, b.dim);
    let n = na * nb;
    let mut out = CMatrix::zeros(n);
    for i in 0..na {
        for j in 0..na {
            let aij = a.data[i * na + j];
            if aij == Complex::new(0.0, 0.0) {
                continue;
            }
            for k in 0..nb {
                let row = (i * nb + k) * n + j * nb;
                for l in 0..nb {
                    out.data[row + l] = aij * b.data[k * nb + l];
                }
            }
        }
    }
    out
}

/// Kronecker product of a non-empty sequence, left to right.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a CMatrix>) -> Option<CMatrix> {
    let mut iter = factors.into_iter();
    let first = iter.next()?.clone();
    Some(iter.fold(first, |acc, m| kron(&acc, m)))
}

/// Determinant by LU decomposition with partial pivoting.
pub fn det(a: &CMatrix) -> Complex {
    let n = a.dim;
    let mut m = a.data.clone();
    let mut result = Complex::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[x * n + col].norm().total_cmp(&m[y * n + col].norm()))
            .unwrap();
        if m[pivot * n + col].norm() == 0.0 {
            return Complex::new(0.0, 0.0);
        }
        if pivot != col {
            for j in 0..n {
                m.swap(pivot * n + j, col * n + j);
            }
            result = -result;
        }
        let p = m[col * n + col];
        result *= p;
        for r in (col + 1)..n {
            let factor = m[r * n + col] / p;
            for j in col..n {
                let v = m[col * n + j];
                m[r * n + j] -= factor * v;
            }
        }
    }
    result
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn inverse(a: &CMatrix) -> Result<CMatrix, LinalgError> {
    let n = a.dim;
    let mut m = a.data.clone();
    let mut inv = CMatrix::identity(n).data;
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[x * n + col].norm().total_cmp(&m[y * n + col].norm()))
            .unwrap();
        if m[pivot * n + col].norm() <= scale * f64::EPSILON * n as f64 {
            return Err(LinalgError::Singular);
        }
        if pivot != col {
            for j in 0..n {
                m.swap(pivot * n + j, col * n + j);
                inv.swap(pivot * n + j, col * n + j);
            }
        }
        let p = m[col * n + col].inv();
        for j in 0..n {
            m[col * n + j] *= p;
            inv[col * n + j] *= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = m[r * n + col];
            if factor == Complex::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                let (mv, iv) = (m[col * n + j], inv[col * n + j]);
                m[r * n + j] -= factor * mv;
                inv[r * n + j] -= factor * iv;
            }
        }
    }
    Ok(CMatrix { dim: n, data: inv })
}

fn require_hermitian(a: &CMatrix, tol: f64) -> Result<(), LinalgError> {
    let residual = a.hermitian_residual();
    if residual > tol {
        return Err(LinalgError::NotHermitian { residual });
    }
    Ok(())
}

/// Closed-form eigenvalues of a 2×2 Hermitian matrix, largest first:
/// `λ = Tr/2 ± sqrt((Tr/2)² − det)`.
pub fn eig2_hermitian(a: &CMatrix, herm_tol: f64) -> Result<(f64, f64), LinalgError> {
    if a.dim != 2 {
        return Err(LinalgError::DimensionMismatch { left: a.dim, right: 2 });
    }
    require_hermitian(a, herm_tol)?;
    let p = a[(0, 0)].re;
    let q = a[(1, 1)].re;
    let off = a[(0, 1)];
    // (Tr/2)² − det written as ((p−q)/2)² + |off|², which cannot go negative.
    let half_trace = 0.5 * (p + q);
    let radius = (0.5 * (p - q)).hypot(off.norm());
    Ok((half_trace + radius, half_trace - radius))
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations,
/// sorted descending.
pub fn eig_hermitian(a: &CMatrix, herm_tol: f64) -> Result<Vec<f64>, LinalgError> {
    let n = a.dim;
    if n > MAX_EIG_DIM {
        return Err(LinalgError::TooLarge(n));
    }
    require_hermitian(a, herm_tol)?;
    let mut m = a.hermitian_part();
    let total = m.frobenius_norm();
    let target = total * f64::EPSILON;

    let off_norm = |m: &CMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&m);
        if off <= target || off == 0.0 {
            break;
        }
        if sweeps == MAX_JACOBI_SWEEPS {
            return Err(LinalgError::NoConvergence { sweeps, off_norm: off });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut m, p, q);
            }
        }
        sweeps += 1;
    }

    let mut eig: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    Ok(eig)
}

/// Annihilates the (p, q) entry with the unitary `V = diag-phase · Givens`,
/// replacing `m` by `V† m V`.
fn jacobi_rotate(m: &mut CMatrix, p: usize, q: usize) {
    let n = m.dim;
    let apq = m[(p, q)];
    let magnitude = apq.norm();
    if magnitude == 0.0 {
        return;
    }
    let phase = apq / magnitude;
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;

    let tau = (aqq - app) / (2.0 * magnitude);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // V restricted to (p, q) = diag(1, conj(phase)) · [[c, s], [-s, c]]
    let v11 = Complex::new(c, 0.0);
    let v12 = Complex::new(s, 0.0);
    let v21 = -phase.conj() * s;
    let v22 = phase.conj() * c;

    for k in 0..n {
        let akp = m.data[k * n + p];
        let akq = m.data[k * n + q];
        m.data[k * n + p] = akp * v11 + akq * v21;
        m.data[k * n + q] = akp * v12 + akq * v22;
    }
    for k in 0..n {
        let apk = m.data[p * n + k];
        let aqk = m.data[q * n + k];
        m.data[p * n + k] = v11.conj() * apk + v21.conj() * aqk;
        m.data[q * n + k] = v12.conj() * apk + v22.conj() * aqk;
    }
    m[(p, q)] = Complex::new(0.0, 0.0);
    m[(q, p)] = Complex::new(0.0, 0.0);
    m[(p, p)].im = 0.0;
    m[(q, q)].im = 0.0;
}

/// True iff the smallest eigenvalue is at least `-tol`. Non-Hermitian or
/// oversized input is reported as not PSD.
pub fn is_psd(a: &CMatrix, tol: f64) -> bool {
    min_eigenvalue(a, DEFAULT_HERM_TOL).is_ok_and(|min| min >= -tol)
}

pub fn min_eigenvalue(a: &CMatrix, herm_tol: f64) -> Result<f64, LinalgError> {
    if a.dim == 2 {
        return eig2_hermitian(a, herm_tol).map(|(_, lo)| lo);
    }
    let eig = eig_hermitian(a, herm_tol)?;
    Ok(*eig.last().expect("non-empty spectrum"))
}

/// Two-component state vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spinor {
    pub up: Complex,
    pub down: Complex,
}

impl Spinor {
    pub fn new(up: Complex, down: Complex, tol: f64) -> Result<Self, LinalgError> {
        let s = Spinor { up, down };
        let n = s.norm_sqr();
        if (n - 1.0).abs() > tol {
            return Err(LinalgError::NotNormalized(n));
        }
        Ok(s)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.up.norm_sqr() + self.down.norm_sqr()
    }

    /// `ψψ†`.
    pub fn projector(&self) -> CMatrix {
        let v = [self.up, self.down];
        let mut m = CMatrix::zeros(2);
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }
}
