//! Spin-1/2 dequantizer/quantizer pairs built from a [`SchemeQuadruple`].
//!
//! The dequantizer components are the projectors `U_k` onto the states with
//! Bloch vectors `e_k`. The quantizer `D_k` is the dual basis under the trace
//! pairing, `Tr{U_j D_k} = δ_jk`. It is available through two independent
//! routes: the closed-form Cramer expressions and numerical inversion of the
//! 4×4 transfer matrix `R`. Cramer is the default; inversion serves as the
//! cross-check.

use serde::{Deserialize, Serialize};
use thiserror::Error;
use twofloat::TwoFloat;

use crate::cmatrix::{self, trace_product, CMatrix, Complex, LinalgError, Spinor};
use crate::geometry::{BlochVector, GeometryError, SchemeQuadruple};
use crate::tolerance::Tolerances;

/// Bound used for identities whose terms are O(1) (dequantizer side).
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemeError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("Bloch vector length {length} is not 1; a spinor needs a pure state")]
    NotPure { length: f64 },
    #[error("Bloch vector length {length} exceeds 1")]
    LengthExceedsOne { length: f64 },
    #[error("Δ{} = {delta:e} is below the coplanarity tolerance", .index + 1)]
    CoplanarQuadruple { index: usize, delta: f64 },
    #[error("transfer matrix R is singular")]
    SingularTransferMatrix,
    #[error("component index {0} out of range 0..4")]
    IndexOutOfRange(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantizerRoute {
    #[default]
    Cramer,
    Inverse,
}

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

/// Spinor with spin projection +1/2 along the unit vector `e`, phase fixed so
/// the upper component is real and non-negative.
pub fn spinor_from_bloch(e: BlochVector, tols: &Tolerances) -> Result<Spinor, SchemeError> {
    let length = e.norm();
    if (length - 1.0).abs() > tols.length {
        return Err(SchemeError::NotPure { length });
    }
    if e.gamma <= -1.0 + tols.pole {
        return Ok(Spinor {
            up: c(0.0, 0.0),
            down: c(1.0, 0.0),
        });
    }
    // ψ = (√(γ+1), (α+iβ)/√(γ+1))/√2
    let up = (0.5 * (e.gamma + 1.0)).sqrt();
    let scale = 1.0 / (2.0 * (e.gamma + 1.0)).sqrt();
    Ok(Spinor {
        up: c(up, 0.0),
        down: c(e.alpha * scale, e.beta * scale),
    })
}

/// `U = ½[[γ+1, α−iβ], [α+iβ, 1−γ]]`; a pure projector for `|e| = 1`, a
/// mixed state inside the ball.
pub fn projector_from_bloch(e: BlochVector, tols: &Tolerances) -> Result<CMatrix, SchemeError> {
    let length = e.norm();
    if !(length <= 1.0 + tols.length) {
        return Err(SchemeError::LengthExceedsOne { length });
    }
    Ok(projector_unchecked(e))
}

fn projector_unchecked(e: BlochVector) -> CMatrix {
    CMatrix::from_rows([
        [c(0.5 * (e.gamma + 1.0), 0.0), c(0.5 * e.alpha, -0.5 * e.beta)],
        [c(0.5 * e.alpha, 0.5 * e.beta), c(0.5 * (1.0 - e.gamma), 0.0)],
    ])
}

/// `u₁,₂ = ½ ± |e|/2`, largest first.
pub fn dequantizer_eigenvalues(e: BlochVector) -> (f64, f64) {
    let r = 0.5 * e.norm();
    (0.5 + r, 0.5 - r)
}

/// `det U = (1 − |e|²)/4`.
pub fn dequantizer_determinant(e: BlochVector) -> f64 {
    0.25 * (1.0 - e.norm_sqr())
}

pub fn build_dequantizer(q: &SchemeQuadruple) -> [CMatrix; 4] {
    q.vectors().map(projector_unchecked)
}

/// Determinant of `[[1, x₁, y₁], [1, x₂, y₂], [1, x₃, y₃]]` in double-double.
fn bordered_det(p: [(f64, f64); 3]) -> TwoFloat {
    let [(x1, y1), (x2, y2), (x3, y3)] = p;
    let d = |a: f64, b: f64| TwoFloat::new_add(a, -b);
    d(x2, x1) * d(y3, y1) - d(x3, x1) * d(y2, y1)
}

/// `|a b c|` in double-double.
fn det3_dd(a: BlochVector, b: BlochVector, c: BlochVector) -> TwoFloat {
    let m = TwoFloat::new_mul;
    let cross = [
        m(b.beta, c.gamma) - m(b.gamma, c.beta),
        m(b.gamma, c.alpha) - m(b.alpha, c.gamma),
        m(b.alpha, c.beta) - m(b.beta, c.alpha),
    ];
    cross[0] * a.alpha + cross[1] * a.beta + cross[2] * a.gamma
}

/// The bordered determinants `A, B, C` entering `D_k` over the vectors other
/// than `e_k` in cyclic order, on the `(α,β)`, `(β,γ)`, `(α,γ)` columns, and
/// `Δ_k` itself.
///
/// Entries of `D_k` are ratios of these with magnitude `1/|Δ_k|`, so
/// rounding in plain doubles grows like `ε/Δ²`; double-double keeps the
/// result at one rounding of the exact value.
fn quantizer_minors(e: &[BlochVector; 4], k: usize) -> ([TwoFloat; 3], TwoFloat) {
    let others = [e[(k + 1) % 4], e[(k + 2) % 4], e[(k + 3) % 4]];
    let minors = [
        bordered_det(others.map(|v| (v.alpha, v.beta))),
        bordered_det(others.map(|v| (v.beta, v.gamma))),
        bordered_det(others.map(|v| (v.alpha, v.gamma))),
    ];
    (minors, det3_dd(others[0], others[1], others[2]))
}

fn check_deltas(q: &SchemeQuadruple, tols: &Tolerances) -> Result<[f64; 4], SchemeError> {
    let deltas = q.deltas();
    for (index, &delta) in deltas.iter().enumerate() {
        if !(delta.abs() >= tols.coplanar) {
            return Err(SchemeError::CoplanarQuadruple { index, delta });
        }
    }
    Ok(deltas)
}

/// Closed-form quantizer. For `D₁`, with `Δ = Δ₁` and minors `A, B, C`
/// over `e₂, e₃, e₄`:
///
/// ```text
/// D₁(11) = ¼ − A/(4Δ)    D₁(22) = ¼ + A/(4Δ)
/// D₁(12) = −(B + iC)/(4Δ)    D₁(21) = conj(D₁(12))
/// ```
///
/// and the other components follow by cyclic shift of the indices.
pub fn build_quantizer_cramer(
    q: &SchemeQuadruple,
    tols: &Tolerances,
) -> Result<[CMatrix; 4], SchemeError> {
    check_deltas(q, tols)?;
    let e = q.vectors();
    Ok(std::array::from_fn(|k| {
        let ([a, b, cc], delta) = quantizer_minors(e, k);
        let four_delta = delta * 4.0;
        let ratio = a / four_delta;
        let off = c(f64::from(-(b / four_delta)), f64::from(-(cc / four_delta)));
        CMatrix::from_rows([
            [c(f64::from(-ratio + 0.25), 0.0), off],
            [off.conj(), c(f64::from(ratio + 0.25), 0.0)],
        ])
    }))
}

/// The transfer matrices: `R` holds dequantizer entries with rows indexed by
/// component and columns by spin pairs `(11), (21), (12), (22)`; `J` holds
/// quantizer entries with rows `(11), (12), (21), (22)` and columns by
/// component. `R·J = 1` encodes orthogonality.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrices {
    pub r: CMatrix,
    pub j: CMatrix,
}

const SPIN_PAIRS_R: [(usize, usize); 4] = [(0, 0), (1, 0), (0, 1), (1, 1)];
const SPIN_PAIRS_J: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

pub fn transfer_matrix(dequantizer: &[CMatrix; 4]) -> CMatrix {
    let mut r = CMatrix::zeros(4);
    for (row, u) in dequantizer.iter().enumerate() {
        for (col, &(k, l)) in SPIN_PAIRS_R.iter().enumerate() {
            r[(row, col)] = u[(k, l)];
        }
    }
    r
}

pub fn quantizer_matrix(quantizer: &[CMatrix; 4]) -> CMatrix {
    let mut j = CMatrix::zeros(4);
    for (col, d) in quantizer.iter().enumerate() {
        for (row, &(k, l)) in SPIN_PAIRS_J.iter().enumerate() {
            j[(row, col)] = d[(k, l)];
        }
    }
    j
}

fn unpack_quantizer(j: &CMatrix) -> [CMatrix; 4] {
    std::array::from_fn(|col| {
        let mut d = CMatrix::zeros(2);
        for (row, &(k, l)) in SPIN_PAIRS_J.iter().enumerate() {
            d[(k, l)] = j[(row, col)];
        }
        d
    })
}

/// `R` with its entries held exactly as double-double `(re, im)` pairs.
fn exact_transfer_matrix(e: &[BlochVector; 4]) -> [[(TwoFloat, TwoFloat); 4]; 4] {
    let half = |x: f64| TwoFloat::from(0.5 * x);
    e.map(|v| {
        // columns (11), (21), (12), (22)
        [
            (TwoFloat::new_add(v.gamma, 1.0) * 0.5, TwoFloat::from(0.0)),
            (half(v.alpha), half(v.beta)),
            (half(v.alpha), half(-v.beta)),
            (TwoFloat::new_add(1.0, -v.gamma) * 0.5, TwoFloat::from(0.0)),
        ]
    })
}

/// `1 − R·J` with `R` exact and every product and sum carried in
/// double-double, rounded once at the end.
fn inversion_residual(r: &[[(TwoFloat, TwoFloat); 4]; 4], j: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(4);
    for row in 0..4 {
        for col in 0..4 {
            let mut re = TwoFloat::from(if row == col { 1.0 } else { 0.0 });
            let mut im = TwoFloat::from(0.0);
            for m in 0..4 {
                let (a, b) = r[row][m];
                let z = j[(m, col)];
                re -= a * z.re - b * z.im;
                im -= a * z.im + b * z.re;
            }
            out[(row, col)] = c(f64::from(re), f64::from(im));
        }
    }
    out
}

const REFINEMENT_STEPS: usize = 3;

pub fn transfer_matrices(q: &SchemeQuadruple, tols: &Tolerances) -> Result<TransferMatrices, SchemeError> {
    check_deltas(q, tols)?;
    let r = transfer_matrix(&build_dequantizer(q));
    let mut j = cmatrix::inverse(&r).map_err(|_| SchemeError::SingularTransferMatrix)?;
    // Entries of J scale like 1/Δ and the inversion error like ε/Δ²; a few
    // refinement steps against the exact R bring it back to rounding level.
    let exact = exact_transfer_matrix(q.vectors());
    for _ in 0..REFINEMENT_STEPS {
        let residual = inversion_residual(&exact, &j);
        if residual.frobenius_norm() == 0.0 {
            break;
        }
        let correction = &j * &residual;
        j += &correction;
    }
    Ok(TransferMatrices { r, j })
}

/// Quantizer by numerical inversion of `R`.
pub fn build_quantizer_inverse(
    q: &SchemeQuadruple,
    tols: &Tolerances,
) -> Result<[CMatrix; 4], SchemeError> {
    let t = transfer_matrices(q, tols)?;
    Ok(unpack_quantizer(&t.j))
}

/// Closed-form eigenvalues of `D_k` (0-based `k`), largest first:
/// `¼ ± sqrt(A² + B² + C²)/(4|Δ_k|)`.
pub fn quantizer_eigenvalues(
    q: &SchemeQuadruple,
    k: usize,
    tols: &Tolerances,
) -> Result<(f64, f64), SchemeError> {
    if k >= 4 {
        return Err(SchemeError::IndexOutOfRange(k));
    }
    check_deltas(q, tols)?;
    let ([a, b, cc], delta) = quantizer_minors(q.vectors(), k);
    let radius = (a * a + b * b + cc * cc).sqrt() / (delta.abs() * 4.0);
    Ok((f64::from(radius + 0.25), f64::from(-radius + 0.25)))
}

/// A complete spin-1/2 scheme: quadruple, dequantizer and quantizer.
#[derive(Debug, Clone, PartialEq)]
pub struct Spin12Scheme {
    quadruple: SchemeQuadruple,
    dequantizer: [CMatrix; 4],
    quantizer: [CMatrix; 4],
    tols: Tolerances,
    label: String,
}

impl Spin12Scheme {
    pub fn new(
        quadruple: SchemeQuadruple,
        label: impl Into<String>,
        tols: Tolerances,
    ) -> Result<Self, SchemeError> {
        Self::with_route(quadruple, label, tols, QuantizerRoute::Cramer)
    }

    pub fn with_route(
        quadruple: SchemeQuadruple,
        label: impl Into<String>,
        tols: Tolerances,
        route: QuantizerRoute,
    ) -> Result<Self, SchemeError> {
        let dequantizer = build_dequantizer(&quadruple);
        let quantizer = match route {
            QuantizerRoute::Cramer => build_quantizer_cramer(&quadruple, &tols)?,
            QuantizerRoute::Inverse => build_quantizer_inverse(&quadruple, &tols)?,
        };
        Ok(Spin12Scheme {
            quadruple,
            dequantizer,
            quantizer,
            tols,
            label: label.into(),
        })
    }

    pub fn from_vectors(
        e: [BlochVector; 4],
        label: impl Into<String>,
        tols: Tolerances,
    ) -> Result<Self, SchemeError> {
        let q = SchemeQuadruple::new(e, &tols)?;
        Self::new(q, label, tols)
    }

    pub fn quadruple(&self) -> &SchemeQuadruple {
        &self.quadruple
    }

    pub fn dequantizer(&self) -> &[CMatrix; 4] {
        &self.dequantizer
    }

    pub fn quantizer(&self) -> &[CMatrix; 4] {
        &self.quantizer
    }

    pub fn tols(&self) -> &Tolerances {
        &self.tols
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Named residual with the bound it is held to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound,
            passed: value <= bound,
        }
    }

    /// Passes when `value < bound` (strict).
    pub fn below(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound,
            passed: value < bound,
        }
    }
}

/// Every identity the scheme should satisfy, evaluated numerically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeDiagnostics {
    pub label: String,
    pub lengths: [f64; 4],
    pub deltas: [f64; 4],
    pub equal_lengths: bool,
    pub orthogonality_residual: f64,
    pub completeness_residual: f64,
    pub dequantizer_eigenvalues: [(f64, f64); 4],
    pub dequantizer_determinants: [f64; 4],
    pub quantizer_eigenvalues: [(f64, f64); 4],
    /// Closed-form vs numerical eigenvalues of `D_k`.
    pub quantizer_eigenvalue_mismatch: f64,
    pub quantizer_determinants: [f64; 4],
    /// `Tr{U_j U_k}`.
    pub dequantizer_trace_products: [[f64; 4]; 4],
    /// `Tr{D_j D_k}`.
    pub quantizer_trace_products: [[f64; 4]; 4],
    pub trace_u_residual: f64,
    pub sum_u_residual: f64,
    pub trace_d_residual: f64,
    pub sum_d_residual: f64,
    pub hermiticity_d_residual: f64,
    /// `|Tr{U_j U_k} − (1 + e_j·e_k)/2|` over all pairs, diagonal included.
    pub trace_product_formula_residual: f64,
    /// Residuals of the three index-swapped three-term identities for the
    /// dequantizer: `(12|34)`, `(13|24)`, `(23|14)`.
    pub three_term_u: [f64; 3],
    /// Same for the quantizer, relative to the largest `|Tr{D_j D_k}|`.
    pub three_term_d_relative: [f64; 3],
    /// `Tr{U₁U₂} − Tr{U₃U₄}`, `Tr{U₁U₃} − Tr{U₂U₄}`, `Tr{U₂U₃} − Tr{U₁U₄}`;
    /// only expected to vanish for equal lengths.
    pub pairwise_u: [f64; 3],
    pub det_r_residual: f64,
    pub rj_residual: f64,
    pub route_agreement: f64,
}

fn three_term(t: &[[f64; 4]; 4]) -> [f64; 3] {
    let side = |a: usize, b: usize| 2.0 * t[a][b] + t[a][a] + t[b][b];
    [
        side(0, 1) - side(2, 3),
        side(0, 2) - side(1, 3),
        side(1, 2) - side(0, 3),
    ]
}

fn trace_table(m: &[CMatrix; 4]) -> [[f64; 4]; 4] {
    std::array::from_fn(|j| {
        std::array::from_fn(|k| trace_product(&m[j], &m[k]).expect("2x2 components").re)
    })
}

/// Largest `|Tr{U_j D_k} − δ_jk|`.
pub fn orthogonality_residual(u: &[CMatrix], d: &[CMatrix]) -> f64 {
    let mut worst = 0.0f64;
    for (j, uj) in u.iter().enumerate() {
        for (k, dk) in d.iter().enumerate() {
            let t = trace_product(uj, dk).expect("matching dimensions");
            let delta = if j == k { 1.0 } else { 0.0 };
            worst = worst.max((t - c(delta, 0.0)).norm());
        }
    }
    worst
}

/// Largest `|Σ_j U_j(kl) D_j(l'k') − δ_kk' δ_ll'|` over all spin indices.
pub fn completeness_residual(u: &[CMatrix], d: &[CMatrix]) -> f64 {
    let n = u[0].dim();
    let mut worst = 0.0f64;
    for k in 0..n {
        for l in 0..n {
            for kp in 0..n {
                for lp in 0..n {
                    let s: Complex = u.iter().zip(d).map(|(uj, dj)| uj[(k, l)] * dj[(lp, kp)]).sum();
                    let want = if k == kp && l == lp { 1.0 } else { 0.0 };
                    worst = worst.max((s - c(want, 0.0)).norm());
                }
            }
        }
    }
    worst
}

pub fn scheme_diagnostics(s: &Spin12Scheme) -> SchemeDiagnostics {
    let tols = s.tols();
    let q = s.quadruple();
    let e = q.vectors();
    let u = s.dequantizer();
    let d = s.quantizer();
    let identity = CMatrix::identity(2);

    let mut sum_u = CMatrix::zeros(2);
    let mut sum_d = CMatrix::zeros(2);
    for k in 0..4 {
        sum_u += &u[k];
        sum_d += &d[k];
    }

    let tu = trace_table(u);
    let td = trace_table(d);
    let mut formula = 0.0f64;
    for j in 0..4 {
        for k in 0..4 {
            formula = formula.max((tu[j][k] - 0.5 * (1.0 + e[j].dot(e[k]))).abs());
        }
    }
    let d_scale = td.iter().flatten().fold(1.0f64, |m, x| m.max(x.abs()));

    let closed_d: [(f64, f64); 4] =
        std::array::from_fn(|k| quantizer_eigenvalues(q, k, tols).unwrap_or((f64::NAN, f64::NAN)));
    let mut mismatch = 0.0f64;
    for k in 0..4 {
        match cmatrix::eig2_hermitian(&d[k], tols.herm) {
            Ok((hi, lo)) => {
                mismatch = mismatch.max((hi - closed_d[k].0).abs()).max((lo - closed_d[k].1).abs())
            }
            Err(_) => mismatch = f64::INFINITY,
        }
    }

    let (det_r_residual, rj_residual) = match transfer_matrices(q, tols) {
        Ok(t) => {
            let det_r = cmatrix::det(&t.r);
            let rj = &t.r * &quantizer_matrix(d);
            (
                (det_r - c(0.0, q.deltas()[0])).norm(),
                rj.max_abs_diff(&CMatrix::identity(4)).expect("4x4"),
            )
        }
        Err(_) => (f64::INFINITY, f64::INFINITY),
    };
    let route_agreement = match (build_quantizer_cramer(q, tols), build_quantizer_inverse(q, tols)) {
        (Ok(a), Ok(b)) => a
            .iter()
            .zip(&b)
            .map(|(x, y)| x.max_abs_diff(y).expect("2x2"))
            .fold(0.0, f64::max),
        _ => f64::INFINITY,
    };

    let three_d = three_term(&td);
    SchemeDiagnostics {
        label: s.label().to_string(),
        lengths: q.lengths(),
        deltas: q.deltas(),
        equal_lengths: q.equal_lengths(IDENTITY_TOL),
        orthogonality_residual: orthogonality_residual(u, d),
        completeness_residual: completeness_residual(u, d),
        dequantizer_eigenvalues: e.map(dequantizer_eigenvalues),
        dequantizer_determinants: e.map(dequantizer_determinant),
        quantizer_eigenvalues: closed_d,
        quantizer_eigenvalue_mismatch: mismatch,
        quantizer_determinants: std::array::from_fn(|k| cmatrix::det(&d[k]).re),
        dequantizer_trace_products: tu,
        quantizer_trace_products: td,
        trace_u_residual: u.iter().map(|m| (m.trace() - c(1.0, 0.0)).norm()).fold(0.0, f64::max),
        sum_u_residual: sum_u.max_abs_diff(&identity.scale(2.0)).expect("2x2"),
        trace_d_residual: d.iter().map(|m| (m.trace() - c(0.5, 0.0)).norm()).fold(0.0, f64::max),
        sum_d_residual: sum_d.max_abs_diff(&identity).expect("2x2"),
        hermiticity_d_residual: d.iter().map(CMatrix::hermitian_residual).fold(0.0, f64::max),
        trace_product_formula_residual: formula,
        three_term_u: three_term(&tu),
        three_term_d_relative: three_d.map(|x| x / d_scale),
        pairwise_u: [tu[0][1] - tu[2][3], tu[0][2] - tu[1][3], tu[1][2] - tu[0][3]],
        det_r_residual,
        rj_residual,
        route_agreement,
    }
}

impl SchemeDiagnostics {
    /// Every asserted identity with its bound. Pairwise trace equalities are
    /// only asserted for equal-length quadruples.
    pub fn checks(&self, tols: &Tolerances) -> Vec<Check> {
        let max_abs = |xs: &[f64]| xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut out = vec![
            Check::at_most("orthogonality Tr{U_j D_k} = δ_jk", self.orthogonality_residual, tols.orth),
            Check::at_most("completeness Σ_j U_j(kl) D_j(l'k') = δδ", self.completeness_residual, tols.orth),
            Check::at_most("Tr U_k = 1", self.trace_u_residual, IDENTITY_TOL),
            Check::at_most("Σ U_k = 2E", self.sum_u_residual, IDENTITY_TOL),
            Check::at_most("Tr D_k = 1/2", self.trace_d_residual, tols.orth),
            Check::at_most("Σ D_k = E", self.sum_d_residual, tols.orth),
            Check::at_most("D_k Hermitian", self.hermiticity_d_residual, tols.herm),
            Check::at_most("Tr{U_j U_k} = (1 + e_j·e_k)/2", self.trace_product_formula_residual, IDENTITY_TOL),
            Check::at_most("three-term identities (U)", max_abs(&self.three_term_u), IDENTITY_TOL),
            Check::at_most("three-term identities (D, relative)", max_abs(&self.three_term_d_relative), tols.orth),
            Check::below(
                "det D_k < 0",
                self.quantizer_determinants.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                0.0,
            ),
            Check::below(
                "D_k eigenvalues of opposite sign",
                self.quantizer_eigenvalues
                    .iter()
                    .map(|&(hi, lo)| (-hi).max(lo))
                    .fold(f64::NEG_INFINITY, f64::max),
                0.0,
            ),
            Check::at_most("closed-form D_k eigenvalues", self.quantizer_eigenvalue_mismatch, tols.orth),
            Check::at_most("det R = iΔ₁", self.det_r_residual, tols.orth),
            Check::at_most("R·J = 1", self.rj_residual, tols.orth),
            Check::at_most("Cramer vs inversion quantizer", self.route_agreement, tols.orth),
        ];
        if self.equal_lengths {
            out.push(Check::at_most("pairwise Tr{U_j U_k} equalities", max_abs(&self.pairwise_u), IDENTITY_TOL));
        }
        out
    }

    pub fn passed(&self, tols: &Tolerances) -> bool {
        self.checks(tols).iter().all(|c| c.passed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{random_quadruple, PurityClass, SamplerOptions};

    fn v(a: f64, b: f64, g: f64) -> BlochVector {
        BlochVector::new(a, b, g)
    }

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    fn example1() -> SchemeQuadruple {
        SchemeQuadruple::new(
            [
                v(0.0, 0.8, 0.6),
                v(0.8, 0.0, -0.6),
                v(0.0, -0.8, 0.6),
                v(-0.8, 0.0, -0.6),
            ],
            &tols(),
        )
        .unwrap()
    }

    fn example2() -> SchemeQuadruple {
        let t = 1.0 / 3.0;
        SchemeQuadruple::new(
            [
                v(0.0, -2.0 * t, t),
                v(2.0 * t, 0.0, -t),
                v(0.0, 2.0 * t, t),
                v(-2.0 * t, 0.0, -t),
            ],
            &tols(),
        )
        .unwrap()
    }

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        a.max_abs_diff(b).unwrap() <= tol
    }

    #[test]
    fn spinor_examples() {
        let s = spinor_from_bloch(v(0.0, 0.0, 1.0), &tols()).unwrap();
        assert_eq!((s.up, s.down), (c(1.0, 0.0), c(0.0, 0.0)));
        let s = spinor_from_bloch(v(0.0, 0.0, -1.0), &tols()).unwrap();
        assert_eq!((s.up, s.down), (c(0.0, 0.0), c(1.0, 0.0)));
        let s = spinor_from_bloch(v(1.0, 0.0, 0.0), &tols()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.up - c(h, 0.0)).norm() < 1e-15 && (s.down - c(h, 0.0)).norm() < 1e-15);
        assert!(matches!(
            spinor_from_bloch(v(0.5, 0.0, 0.0), &tols()),
            Err(SchemeError::NotPure { .. })
        ));
    }

    #[test]
    fn spinor_projector_matches_bloch_projector() {
        for e in example1().vectors() {
            let p = spinor_from_bloch(*e, &tols()).unwrap().projector();
            assert!(close(&p, &projector_from_bloch(*e, &tols()).unwrap(), 1e-15));
        }
    }

    #[test]
    fn projector_examples() {
        let u = projector_from_bloch(v(0.0, 0.8, 0.6), &tols()).unwrap();
        let want = CMatrix::from_rows([[c(4.0, 0.0), c(0.0, -2.0)], [c(0.0, 2.0), c(1.0, 0.0)]]).scale(0.2);
        assert!(close(&u, &want, 1e-15));

        let u = projector_from_bloch(v(0.0, -2.0 / 3.0, 1.0 / 3.0), &tols()).unwrap();
        let want = CMatrix::from_rows([[c(2.0, 0.0), c(0.0, 1.0)], [c(0.0, -1.0), c(1.0, 0.0)]]).scale(1.0 / 3.0);
        assert!(close(&u, &want, 1e-15));

        let u = projector_from_bloch(BlochVector::ZERO, &tols()).unwrap();
        assert_eq!(u, CMatrix::identity(2).scale(0.5));

        assert!(matches!(
            projector_from_bloch(v(1.0, 1.0, 0.0), &tols()),
            Err(SchemeError::LengthExceedsOne { .. })
        ));
    }

    #[test]
    fn dequantizer_eigenvalue_examples() {
        assert_eq!(dequantizer_eigenvalues(v(0.0, 0.0, 1.0)), (1.0, 0.0));
        assert_eq!(dequantizer_determinant(v(0.0, 0.0, 1.0)), 0.0);
        let (hi, lo) = dequantizer_eigenvalues(v(0.0, -2.0 / 3.0, 1.0 / 3.0));
        let r = 5f64.sqrt() / 6.0;
        assert!((hi - 0.5 - r).abs() < 1e-15 && (lo - 0.5 + r).abs() < 1e-15);
        assert_eq!(dequantizer_eigenvalues(BlochVector::ZERO), (0.5, 0.5));
        assert_eq!(dequantizer_determinant(BlochVector::ZERO), 0.25);
    }

    #[test]
    fn cramer_matches_printed_example1() {
        let d = build_quantizer_cramer(&example1(), &tols()).unwrap();
        let want = [
            [[c(4.0 / 3.0, 0.0), c(0.0, -1.25)], [c(0.0, 1.25), c(-1.0 / 3.0, 0.0)]],
            [[c(-1.0 / 3.0, 0.0), c(1.25, 0.0)], [c(1.25, 0.0), c(4.0 / 3.0, 0.0)]],
            [[c(4.0 / 3.0, 0.0), c(0.0, 1.25)], [c(0.0, -1.25), c(-1.0 / 3.0, 0.0)]],
            [[c(-1.0 / 3.0, 0.0), c(-1.25, 0.0)], [c(-1.25, 0.0), c(4.0 / 3.0, 0.0)]],
        ];
        for k in 0..4 {
            assert!(close(&d[k], &CMatrix::from_rows(want[k]).scale(0.5), 1e-14), "D{}", k + 1);
        }
        let inv = build_quantizer_inverse(&example1(), &tols()).unwrap();
        for k in 0..4 {
            assert!(close(&d[k], &inv[k], 1e-14));
        }
    }

    #[test]
    fn cramer_matches_printed_example2() {
        let d = build_quantizer_cramer(&example2(), &tols()).unwrap();
        let want = [
            [[c(2.0, 0.0), c(0.0, 1.5)], [c(0.0, -1.5), c(-1.0, 0.0)]],
            [[c(-1.0, 0.0), c(1.5, 0.0)], [c(1.5, 0.0), c(2.0, 0.0)]],
            [[c(2.0, 0.0), c(0.0, -1.5)], [c(0.0, 1.5), c(-1.0, 0.0)]],
            [[c(-1.0, 0.0), c(-1.5, 0.0)], [c(-1.5, 0.0), c(2.0, 0.0)]],
        ];
        for k in 0..4 {
            assert!(close(&d[k], &CMatrix::from_rows(want[k]).scale(0.5), 1e-14), "D{}", k + 1);
        }
    }

    #[test]
    fn coplanar_rejected_at_build() {
        // Tighter tolerance set than the one the quadruple was validated with.
        let strict = Tolerances {
            coplanar: 10.0,
            ..tols()
        };
        assert!(matches!(
            build_quantizer_cramer(&example1(), &strict),
            Err(SchemeError::CoplanarQuadruple { index: 0, .. })
        ));
        assert!(matches!(
            build_quantizer_inverse(&example1(), &strict),
            Err(SchemeError::CoplanarQuadruple { .. })
        ));
    }

    #[test]
    fn det_r_is_i_delta1() {
        let q = example1();
        let t = transfer_matrices(&q, &tols()).unwrap();
        let det_r = cmatrix::det(&t.r);
        assert!((det_r - c(0.0, q.deltas()[0])).norm() < 1e-12);
        // Δ₁ = |e₂ e₃ e₄| = 0.768 for the pure example
        assert!((q.deltas()[0] - 0.768).abs() < 1e-15);
    }

    #[test]
    fn quantizer_eigenvalue_examples() {
        let q = example1();
        let (hi, lo) = quantizer_eigenvalues(&q, 0, &tols()).unwrap();
        let d = build_quantizer_cramer(&q, &tols()).unwrap();
        let (nhi, nlo) = cmatrix::eig2_hermitian(&d[0], 1e-10).unwrap();
        assert!((hi - nhi).abs() < 1e-12 && (lo - nlo).abs() < 1e-12);
        assert!((hi - 1.0012).abs() < 1e-4 && (lo + 0.5012).abs() < 1e-4);
        assert!((hi + lo - 0.5).abs() < 1e-15);
        assert!(hi * lo < 0.0);
        assert!((hi * lo - cmatrix::det(&d[0]).re).abs() < 1e-12);
        assert_eq!(quantizer_eigenvalues(&q, 4, &tols()), Err(SchemeError::IndexOutOfRange(4)));
    }

    #[test]
    fn presets_pass_diagnostics() {
        for q in [example1(), example2()] {
            let s = Spin12Scheme::new(q, "ex", tols()).unwrap();
            let diag = scheme_diagnostics(&s);
            for check in diag.checks(&tols()) {
                assert!(check.passed, "{check:?}");
            }
            assert!(diag.equal_lengths);
            assert!(diag.pairwise_u.iter().all(|x| x.abs() <= 1e-12));
        }
    }

    #[test]
    fn trace_products_follow_bloch_formula() {
        let opts = SamplerOptions::default();
        for seed in 0..50 {
            let q = random_quadruple(seed, PurityClass::Heterogeneous, &opts).unwrap();
            let s = Spin12Scheme::new(q, "random", tols()).unwrap();
            let diag = scheme_diagnostics(&s);
            assert!(diag.trace_product_formula_residual <= 1e-12);
            assert!(diag.three_term_u.iter().all(|x| x.abs() <= 1e-12));
            assert!(!diag.equal_lengths);
            assert!(diag.passed(&tols()), "{:?}", diag.checks(&tols()));
        }
    }

    #[test]
    fn inverse_route_scheme() {
        let a = Spin12Scheme::new(example2(), "a", tols()).unwrap();
        let b = Spin12Scheme::with_route(example2(), "b", tols(), QuantizerRoute::Inverse).unwrap();
        for k in 0..4 {
            assert!(close(&a.quantizer()[k], &b.quantizer()[k], 1e-14));
        }
    }
}
