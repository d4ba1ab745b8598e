//! Named families of two-qubit states.

use super::FanoState;
use crate::error::{Error, Result};
use crate::linalg::{outer, Mat3, Vec3};

/// Singlet `(|01⟩ − |10⟩)/√2`, `T = −1`.
pub fn singlet() -> FanoState {
    FanoState::t_state(Mat3::identity().scale(-1.0)).expect("singlet is physical")
}

/// Singlet mixed with white noise: `T = −w·1`, physical for `w ∈ [−1/3, 1]`.
pub fn werner(w: f64) -> Result<FanoState> {
    FanoState::t_state(Mat3::identity().scale(-w))
}

/// Bell-diagonal state `T = diag(t₁, t₂, t₃)`. The point must lie in the
/// tetrahedron spanned by `(−1,−1,−1), (−1,1,1), (1,−1,1), (1,1,−1)`.
pub fn bell_diagonal(t1: f64, t2: f64, t3: f64) -> Result<FanoState> {
    // Four times the Bell-basis weights.
    let weights = [
        1.0 - t1 - t2 - t3,
        1.0 - t1 + t2 + t3,
        1.0 + t1 - t2 + t3,
        1.0 + t1 + t2 - t3,
    ];
    if let Some(w) = weights.iter().find(|w| **w < -4e-10) {
        return Err(Error::Unphysical(format!(
            "({t1}, {t2}, {t3}) lies outside the Bell tetrahedron (weight {})",
            w / 4.0
        )));
    }
    FanoState::t_state(Mat3::from_diag([t1, t2, t3]))
}

/// Bell-diagonal state whose two largest correlation singular values are
/// `s₁ ≥ s₂`: `T = diag(−s₁, −s₂, min(0, 1 − s₁ − s₂))`.
pub fn with_top_singular_values(s1: f64, s2: f64) -> Result<FanoState> {
    if !(0.0..=1.0).contains(&s2) || !(s2..=1.0).contains(&s1) {
        return Err(crate::error::invalid(format!(
            "need 1 ≥ s₁ ≥ s₂ ≥ 0, got ({s1}, {s2})"
        )));
    }
    bell_diagonal(-s1, -s2, (1.0 - s1 - s2).min(0.0))
}

/// Product state with Bloch vectors `a` and `b`; `T = a bᵀ`.
pub fn product(a: Vec3, b: Vec3) -> Result<FanoState> {
    FanoState::new(a, b, outer(&a, &b))
}
