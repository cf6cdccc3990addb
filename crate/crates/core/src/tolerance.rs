use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by every stage of scheme construction and
/// state mapping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Element-wise `|A − A†|` bound for Hermitian inputs.
    pub herm: f64,
    /// Bound on `|e₁ + e₂ + e₃ + e₄|`.
    pub closure: f64,
    /// Smallest admissible `|Δ_k|`. Looser than the rest because Δ is a
    /// divisor in the quantizer.
    pub coplanar: f64,
    /// Slack on Bloch-vector lengths; also the pure/mixed boundary width.
    pub length: f64,
    /// Orthogonality and completeness residual bound.
    pub orth: f64,
    /// Smallest eigenvalue accepted for a density matrix is `-psd`.
    pub psd: f64,
    /// Distance from γ = −1 at which the spinor switches to the south-pole form.
    pub pole: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            herm: 1e-10,
            closure: 1e-10,
            coplanar: 1e-8,
            length: 1e-12,
            orth: 1e-10,
            psd: 1e-10,
            pole: 1e-12,
        }
    }
}
