//! Quadruples of Bloch vectors that seed a normalized scheme.
//!
//! A quadruple is admissible when its four vectors close (sum to zero), none
//! is longer than one, and no three of them are coplanar. Geometrically the
//! vectors are the directed edges of a non-degenerate tetrahedron obtained by
//! folding a planar quadrilateral along one of its diagonals.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tolerance::Tolerances;

/// Real 3-vector `(α, β, γ)` describing one projecting state.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BlochVector {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl BlochVector {
    pub const ZERO: BlochVector = BlochVector::new(0.0, 0.0, 0.0);

    pub const fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        BlochVector { alpha, beta, gamma }
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        BlochVector::new(v[0], v[1], v[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    pub fn norm_sqr(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn dot(self, other: BlochVector) -> f64 {
        self.alpha * other.alpha + self.beta * other.beta + self.gamma * other.gamma
    }

    pub fn cross(self, o: BlochVector) -> BlochVector {
        BlochVector::new(
            self.beta * o.gamma - self.gamma * o.beta,
            self.gamma * o.alpha - self.alpha * o.gamma,
            self.alpha * o.beta - self.beta * o.alpha,
        )
    }

    pub fn is_finite(self) -> bool {
        self.alpha.is_finite() && self.beta.is_finite() && self.gamma.is_finite()
    }

    pub fn classify(self, tols: &Tolerances) -> VectorPurity {
        let len = self.norm();
        if len > 1.0 + tols.length {
            VectorPurity::TooLong
        } else if len > 1.0 - tols.length {
            VectorPurity::Pure
        } else {
            VectorPurity::Mixed
        }
    }
}

impl Add for BlochVector {
    type Output = BlochVector;
    fn add(self, o: BlochVector) -> BlochVector {
        BlochVector::new(self.alpha + o.alpha, self.beta + o.beta, self.gamma + o.gamma)
    }
}

impl Sub for BlochVector {
    type Output = BlochVector;
    fn sub(self, o: BlochVector) -> BlochVector {
        BlochVector::new(self.alpha - o.alpha, self.beta - o.beta, self.gamma - o.gamma)
    }
}

impl Neg for BlochVector {
    type Output = BlochVector;
    fn neg(self) -> BlochVector {
        BlochVector::new(-self.alpha, -self.beta, -self.gamma)
    }
}

impl Mul<f64> for BlochVector {
    type Output = BlochVector;
    fn mul(self, s: f64) -> BlochVector {
        BlochVector::new(self.alpha * s, self.beta * s, self.gamma * s)
    }
}

impl fmt::Display for BlochVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.alpha, self.beta, self.gamma)
    }
}

/// Determinant of the 3×3 matrix with rows `a`, `b`, `c`.
pub fn det3(a: BlochVector, b: BlochVector, c: BlochVector) -> f64 {
    a.dot(b.cross(c))
}

/// `Δ_k` is the determinant of the three vectors other than `e_k`, taken in
/// cyclic order starting after `k`: `Δ₁ = |e₂ e₃ e₄|`, `Δ₂ = |e₃ e₄ e₁|`, ...
pub fn coplanarity_determinants(e: &[BlochVector; 4]) -> [f64; 4] {
    std::array::from_fn(|k| det3(e[(k + 1) % 4], e[(k + 2) % 4], e[(k + 3) % 4]))
}

/// Left-to-right sum `((e₁ + e₂) + e₃) + e₄`.
pub fn closure_sum(e: &[BlochVector; 4]) -> BlochVector {
    e.iter().copied().fold(BlochVector::ZERO, |acc, v| acc + v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorPurity {
    Pure,
    Mixed,
    TooLong,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PurityClass {
    AllPure,
    AllMixed,
    Heterogeneous,
}

impl fmt::Display for PurityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PurityClass::AllPure => "all pure",
            PurityClass::AllMixed => "all mixed",
            PurityClass::Heterogeneous => "heterogeneous",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValidationFailure {
    NonFinite { index: usize },
    LengthExceedsOne { index: usize, length: f64 },
    ClosureViolated { residual: f64 },
    Coplanar { index: usize, delta: f64 },
}

impl fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ValidationFailure::NonFinite { index } => {
                write!(f, "e{} has a non-finite component", index + 1)
            }
            ValidationFailure::LengthExceedsOne { index, length } => {
                write!(f, "|e{}| = {length} exceeds 1", index + 1)
            }
            ValidationFailure::ClosureViolated { residual } => {
                write!(f, "|e1 + e2 + e3 + e4| = {residual:e} violates closure")
            }
            ValidationFailure::Coplanar { index, delta } => write!(
                f,
                "Δ{} = {delta:e} vanishes: the vectors other than e{} are coplanar",
                index + 1,
                index + 1
            ),
        }
    }
}

/// Diagnostic summary of a candidate quadruple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub closure_residual: f64,
    pub lengths: [f64; 4],
    pub deltas: [f64; 4],
    pub purities: [VectorPurity; 4],
    /// `None` when some vector is too long.
    pub purity_class: Option<PurityClass>,
    /// Largest deviation from `Δ₁ = −Δ₂ = Δ₃ = −Δ₄`.
    pub delta_alternation_residual: f64,
    pub failures: Vec<ValidationFailure>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn min_abs_delta(&self) -> f64 {
        self.deltas.iter().map(|d| d.abs()).fold(f64::INFINITY, f64::min)
    }
}

pub fn validate_quadruple(e: &[BlochVector; 4], tols: &Tolerances) -> ValidationReport {
    let mut failures = Vec::new();
    for (index, v) in e.iter().enumerate() {
        if !v.is_finite() {
            failures.push(ValidationFailure::NonFinite { index });
        }
    }

    let lengths = e.map(BlochVector::norm);
    let purities = e.map(|v| v.classify(tols));
    for (index, p) in purities.iter().enumerate() {
        if *p == VectorPurity::TooLong {
            failures.push(ValidationFailure::LengthExceedsOne {
                index,
                length: lengths[index],
            });
        }
    }

    let closure_residual = closure_sum(e).norm();
    if !(closure_residual <= tols.closure) {
        failures.push(ValidationFailure::ClosureViolated {
            residual: closure_residual,
        });
    }

    let deltas = coplanarity_determinants(e);
    for (index, &delta) in deltas.iter().enumerate() {
        if !(delta.abs() >= tols.coplanar) {
            failures.push(ValidationFailure::Coplanar { index, delta });
        }
    }
    let delta_alternation_residual = [
        (deltas[0] + deltas[1]).abs(),
        (deltas[0] - deltas[2]).abs(),
        (deltas[0] + deltas[3]).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    let purity_class = classify_quadruple(&purities);

    ValidationReport {
        closure_residual,
        lengths,
        deltas,
        purities,
        purity_class,
        delta_alternation_residual,
        failures,
    }
}

fn classify_quadruple(purities: &[VectorPurity; 4]) -> Option<PurityClass> {
    if purities.contains(&VectorPurity::TooLong) {
        None
    } else if purities.iter().all(|p| *p == VectorPurity::Pure) {
        Some(PurityClass::AllPure)
    } else if purities.iter().all(|p| *p == VectorPurity::Mixed) {
        Some(PurityClass::AllMixed)
    } else {
        Some(PurityClass::Heterogeneous)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid quadruple: {}", join_failures(.0))]
    InvalidQuadruple(Vec<ValidationFailure>),
    #[error("triple is coplanar (determinant {0:e})")]
    CoplanarTriple(f64),
    #[error("|e{index}| = {length} exceeds 1")]
    VectorTooLong { index: usize, length: f64 },
    #[error("closing vector e4 = -(e1 + e2 + e3) has length {0} > 1")]
    FourthVectorTooLong(f64),
    #[error("quadrilateral side {index} has length {length} > 1")]
    SideTooLong { index: usize, length: f64 },
    #[error("quadrilateral is self-intersecting or has non-finite vertices")]
    SelfIntersecting,
    #[error("fold angle {0} outside [0, π]")]
    InvalidFoldAngle(f64),
    #[error("fold is degenerate: min |Δ| = {min_delta:e}")]
    DegenerateFold { min_delta: f64 },
    #[error("no admissible quadruple after {0} attempts")]
    ExhaustedAttempts(usize),
}

fn join_failures(failures: &[ValidationFailure]) -> String {
    failures
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Four Bloch vectors known to close, stay within the unit ball and span
/// space in every triple.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeQuadruple {
    e: [BlochVector; 4],
    purity_class: PurityClass,
    deltas: [f64; 4],
}

impl SchemeQuadruple {
    pub fn new(e: [BlochVector; 4], tols: &Tolerances) -> Result<Self, GeometryError> {
        let report = validate_quadruple(&e, tols);
        if !report.passed() {
            return Err(GeometryError::InvalidQuadruple(report.failures));
        }
        Ok(SchemeQuadruple {
            e,
            purity_class: report.purity_class.expect("validated lengths"),
            deltas: report.deltas,
        })
    }

    pub fn vectors(&self) -> &[BlochVector; 4] {
        &self.e
    }

    pub fn purity_class(&self) -> PurityClass {
        self.purity_class
    }

    pub fn deltas(&self) -> [f64; 4] {
        self.deltas
    }

    pub fn lengths(&self) -> [f64; 4] {
        self.e.map(BlochVector::norm)
    }

    /// True when all four vectors have the same length to within `tol`.
    pub fn equal_lengths(&self, tol: f64) -> bool {
        let l = self.lengths();
        l.iter().all(|x| (x - l[0]).abs() <= tol)
    }
}

/// Completes a triple with `e₄ = −(e₁ + e₂ + e₃)`.
pub fn quadruple_from_triple(
    e1: BlochVector,
    e2: BlochVector,
    e3: BlochVector,
    tols: &Tolerances,
) -> Result<SchemeQuadruple, GeometryError> {
    for (index, v) in [e1, e2, e3].into_iter().enumerate() {
        if !v.is_finite() {
            return Err(GeometryError::InvalidQuadruple(vec![ValidationFailure::NonFinite {
                index,
            }]));
        }
        if v.classify(tols) == VectorPurity::TooLong {
            return Err(GeometryError::VectorTooLong {
                index: index + 1,
                length: v.norm(),
            });
        }
    }
    let volume = det3(e1, e2, e3);
    if volume.abs() < tols.coplanar {
        return Err(GeometryError::CoplanarTriple(volume));
    }
    let e4 = -(e1 + e2 + e3);
    if e4.classify(tols) == VectorPurity::TooLong {
        return Err(GeometryError::FourthVectorTooLong(e4.norm()));
    }
    SchemeQuadruple::new([e1, e2, e3, e4], tols)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FoldDiagonal {
    V0V2,
    V1V3,
}

/// Planar quadrilateral whose directed sides become the scheme vectors after
/// folding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarQuadrilateral {
    vertices: [[f64; 2]; 4],
    fold_diagonal: FoldDiagonal,
}

impl PlanarQuadrilateral {
    pub fn new(
        vertices: [[f64; 2]; 4],
        fold_diagonal: FoldDiagonal,
        tols: &Tolerances,
    ) -> Result<Self, GeometryError> {
        if vertices.iter().flatten().any(|x| !x.is_finite()) {
            return Err(GeometryError::SelfIntersecting);
        }
        let q = PlanarQuadrilateral {
            vertices,
            fold_diagonal,
        };
        for (index, length) in q.side_lengths().into_iter().enumerate() {
            if length > 1.0 + tols.length {
                return Err(GeometryError::SideTooLong {
                    index: index + 1,
                    length,
                });
            }
        }
        let v = &vertices;
        if segments_cross(v[0], v[1], v[2], v[3]) || segments_cross(v[1], v[2], v[3], v[0]) {
            return Err(GeometryError::SelfIntersecting);
        }
        Ok(q)
    }

    /// Rhombus with unit sides and interior angle `angle` at vertex 0.
    pub fn unit_rhombus(angle: f64, fold_diagonal: FoldDiagonal, tols: &Tolerances) -> Result<Self, GeometryError> {
        let (s, c) = angle.sin_cos();
        Self::new(
            [[0.0, 0.0], [1.0, 0.0], [1.0 + c, s], [c, s]],
            fold_diagonal,
            tols,
        )
    }

    pub fn vertices(&self) -> [[f64; 2]; 4] {
        self.vertices
    }

    pub fn fold_diagonal(&self) -> FoldDiagonal {
        self.fold_diagonal
    }

    pub fn side_lengths(&self) -> [f64; 4] {
        let v = &self.vertices;
        std::array::from_fn(|k| {
            let (a, b) = (v[k], v[(k + 1) % 4]);
            (b[0] - a[0]).hypot(b[1] - a[1])
        })
    }
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Proper crossing of segments `ab` and `cd`.
fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let (d1, d2) = (orient(a, b, c), orient(a, b, d));
    let (d3, d4) = (orient(c, d, a), orient(c, d, b));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Rodrigues rotation of `v` about the unit axis `axis` by `angle`.
fn rotate_about(v: BlochVector, axis: BlochVector, angle: f64) -> BlochVector {
    let (s, c) = angle.sin_cos();
    v * c + axis.cross(v) * s + axis * (axis.dot(v) * (1.0 - c))
}

/// Folds the quadrilateral along its fold diagonal by `fold_angle` and
/// returns the directed edges of the resulting tetrahedron as a quadruple.
///
/// The vertex off the diagonal with the larger index is rotated (V3 for a
/// V0V2 fold, V2 for V1V3). The fourth edge is taken as `−(e₁ + e₂ + e₃)`
/// so the quadruple closes exactly.
pub fn fold_quadrilateral(
    q: &PlanarQuadrilateral,
    fold_angle: f64,
    tols: &Tolerances,
) -> Result<SchemeQuadruple, GeometryError> {
    if !(0.0..=std::f64::consts::PI).contains(&fold_angle) {
        return Err(GeometryError::InvalidFoldAngle(fold_angle));
    }
    let mut v = q.vertices.map(|[x, y]| BlochVector::new(x, y, 0.0));
    let (a, b, moving) = match q.fold_diagonal {
        FoldDiagonal::V0V2 => (0, 2, 3),
        FoldDiagonal::V1V3 => (1, 3, 2),
    };
    let diag = v[b] - v[a];
    let diag_len = diag.norm();
    if diag_len == 0.0 {
        return Err(GeometryError::DegenerateFold { min_delta: 0.0 });
    }
    let axis = diag * (1.0 / diag_len);
    v[moving] = v[a] + rotate_about(v[moving] - v[a], axis, fold_angle);

    let e1 = v[1] - v[0];
    let e2 = v[2] - v[1];
    let e3 = v[3] - v[2];
    let e4 = -(e1 + e2 + e3);
    let e = [e1, e2, e3, e4];
    let report = validate_quadruple(&e, tols);
    if report
        .failures
        .iter()
        .any(|f| matches!(f, ValidationFailure::Coplanar { .. }))
    {
        return Err(GeometryError::DegenerateFold {
            min_delta: report.min_abs_delta(),
        });
    }
    SchemeQuadruple::new(e, tols)
}

/// Knobs for [`random_quadruple`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerOptions {
    pub max_attempts: usize,
    /// Radius of the ball from which mixed vectors are drawn.
    pub mixed_radius: f64,
    pub tols: Tolerances,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions {
            max_attempts: 10_000,
            mixed_radius: 0.95,
            tols: Tolerances::default(),
        }
    }
}

fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R) -> BlochVector {
    BlochVector::new(
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
    )
}

fn unit_vector<R: Rng + ?Sized>(rng: &mut R) -> BlochVector {
    loop {
        let g = gaussian_vector(rng);
        let n = g.norm();
        if n > 1e-6 {
            return g * (1.0 / n);
        }
    }
}

fn ball_vector<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> BlochVector {
    let r = radius * rng.random::<f64>().cbrt();
    unit_vector(rng) * r
}

/// Uniformly random rotation applied through a unit quaternion.
fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> impl Fn(BlochVector) -> BlochVector {
    let mut q: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    q.iter_mut().for_each(|x| *x /= n);
    let [w, x, y, z] = q;
    move |v: BlochVector| {
        let u = BlochVector::new(x, y, z);
        let t = u.cross(v) * 2.0;
        v + t * w + u.cross(t)
    }
}

/// Rounds each component to a multiple of 2⁻⁵⁰. For components in [−1, 1]
/// every partial sum of three such vectors is then exact, so the closing
/// vector makes `e₁ + e₂ + e₃ + e₄ = 0` hold in real arithmetic and not just
/// after rounding.
fn snap_to_grid(v: BlochVector) -> BlochVector {
    const SCALE: f64 = (1u64 << 50) as f64;
    let snap = |x: f64| (x * SCALE).round() / SCALE;
    BlochVector::new(snap(v.alpha), snap(v.beta), snap(v.gamma))
}

fn sample_once<R: Rng + ?Sized>(
    rng: &mut R,
    mode: PurityClass,
    opts: &SamplerOptions,
) -> Result<SchemeQuadruple, GeometryError> {
    let tols = &opts.tols;
    let (e1, e2, e3) = match mode {
        PurityClass::AllPure => {
            // Naive unit triples almost never close onto a unit e4; fold a
            // unit rhombus instead, which keeps all four edges unit length.
            let pi = std::f64::consts::PI;
            let angle = rng.random_range(0.15 * pi..0.85 * pi);
            let diagonal = if rng.random::<bool>() {
                FoldDiagonal::V0V2
            } else {
                FoldDiagonal::V1V3
            };
            let fold = rng.random_range(0.1 * pi..0.9 * pi);
            let rhombus = PlanarQuadrilateral::unit_rhombus(angle, diagonal, tols)?;
            let folded = fold_quadrilateral(&rhombus, fold, tols)?;
            let rot = random_rotation(rng);
            let e = folded.vectors();
            (rot(e[0]), rot(e[1]), rot(e[2]))
        }
        PurityClass::AllMixed => (
            ball_vector(rng, opts.mixed_radius),
            ball_vector(rng, opts.mixed_radius),
            ball_vector(rng, opts.mixed_radius),
        ),
        PurityClass::Heterogeneous => (
            unit_vector(rng),
            ball_vector(rng, opts.mixed_radius),
            ball_vector(rng, opts.mixed_radius),
        ),
    };
    quadruple_from_triple(snap_to_grid(e1), snap_to_grid(e2), snap_to_grid(e3), tols)
}

/// Draws an admissible quadruple of the requested purity class from `rng`.
pub fn sample_quadruple<R: Rng + ?Sized>(
    rng: &mut R,
    mode: PurityClass,
    opts: &SamplerOptions,
) -> Result<SchemeQuadruple, GeometryError> {
    for _ in 0..opts.max_attempts {
        if let Ok(q) = sample_once(rng, mode, opts) {
            if q.purity_class() == mode {
                return Ok(q);
            }
        }
    }
    Err(GeometryError::ExhaustedAttempts(opts.max_attempts))
}

/// Deterministic single draw from a seed.
pub fn random_quadruple(
    seed: u64,
    mode: PurityClass,
    opts: &SamplerOptions,
) -> Result<SchemeQuadruple, GeometryError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_quadruple(&mut rng, mode, opts)
}
