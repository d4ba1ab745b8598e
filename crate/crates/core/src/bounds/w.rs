//! The 2×2 matrix `W` carrying the strength and angle dependence of the
//! unbiased bound, and its singular values.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::{Mat2, Svd};
use crate::model::StrengthQuad;

/// Angles may overshoot `[0, π]` by this much (e.g. from `acos` round-off).
const ANGLE_SLACK: f64 = 1e-12;
const CONSISTENCY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WBundle {
    pub w: Mat2,
    pub coeff_a: f64,
    pub coeff_b: f64,
    pub coeff_c: f64,
    pub coeff_d: f64,
    /// `s₁(W) + s₂(W)` from the closed form.
    pub i_plus: f64,
    /// `s₁(W) − s₂(W)` from the closed form.
    pub i_minus: f64,
    /// Eigenvalues of `WᵀW`, larger first.
    pub w_eig_plus: f64,
    pub w_eig_minus: f64,
    /// Singular values of `W` by SVD.
    pub s_w: [f64; 2],
}

impl WBundle {
    pub fn det(&self) -> f64 {
        self.w.det()
    }
}

/// `[A, B, C, D]`.
pub fn coefficients(q: &StrengthQuad) -> [f64; 4] {
    let StrengthQuad { sx, sxp, sy, syp } = *q;
    [
        sx * sy + sx * syp + sxp * sy - sxp * syp,
        sx * sy - sx * syp + sxp * sy + sxp * syp,
        sx * sy + sx * syp - sxp * sy + sxp * syp,
        -sx * sy + sx * syp + sxp * sy + sxp * syp,
    ]
}

pub(crate) fn check_angle(name: &str, a: f64) -> Result<f64> {
    if !a.is_finite() || a < -ANGLE_SLACK || a > std::f64::consts::PI + ANGLE_SLACK {
        return Err(invalid(format!("{name} = {a} must lie in [0, π]")));
    }
    Ok(a.clamp(0.0, std::f64::consts::PI))
}

/// `I₊²` and `I₋²` written directly in strengths and angles.
pub fn i_squared(q: &StrengthQuad, theta: f64, phi: f64) -> (f64, f64) {
    let StrengthQuad { sx, sxp, sy, syp } = *q;
    let base = (sx * sx + sxp * sxp) * (sy * sy + syp * syp)
        + 2.0 * sx * sxp * (sy * sy - syp * syp) * theta.cos()
        + 2.0 * sy * syp * (sx * sx - sxp * sxp) * phi.cos();
    let cross = 4.0 * sx * sxp * sy * syp * theta.sin() * phi.sin();
    (base + cross, base - cross)
}

pub fn w_matrix(q: &StrengthQuad, theta: f64, phi: f64) -> Mat2 {
    let [a, b, c, d] = coefficients(q);
    let (st, ct) = (0.5 * theta).sin_cos();
    let (sp, cp) = (0.5 * phi).sin_cos();
    Mat2::from_rows([[a * ct * cp, b * ct * sp], [c * st * cp, -d * st * sp]])
}

pub fn w_bundle(q: &StrengthQuad, theta: f64, phi: f64) -> Result<WBundle> {
    let theta = check_angle("θ", theta)?;
    let phi = check_angle("φ", phi)?;
    let [a, b, c, d] = coefficients(q);
    let w = w_matrix(q, theta, phi);
    let (ip2, im2) = i_squared(q, theta, phi);
    let i_plus = ip2.max(0.0).sqrt();
    // `I₋² = tr(WᵀW) − 2|det W|` is a sum of two squares, which avoids the
    // cancellation in `im2` when s₁(W) ≈ s₂(W).
    let [[p, r], [t, u]] = w.0;
    let im2_stable = if p * u - r * t >= 0.0 {
        (p - u).powi(2) + (r + t).powi(2)
    } else {
        (p + u).powi(2) + (r - t).powi(2)
    };
    let i_minus = im2_stable.sqrt();

    let s_w = w.svd()?.s;
    let scale = 1.0f64.max(i_plus);
    let mismatch = [
        (i_plus - (s_w[0] + s_w[1])).abs(),
        (i_minus - (s_w[0] - s_w[1])).abs(),
        (im2_stable - im2).abs() / scale,
    ];
    if mismatch.iter().any(|m| !(*m <= CONSISTENCY_TOL * scale)) {
        return Err(Error::InternalConsistency(format!(
            "closed form I± = ({i_plus}, {i_minus}) disagrees with SVD {s_w:?} (mismatch {mismatch:?})"
        )));
    }
    Ok(WBundle {
        w,
        coeff_a: a,
        coeff_b: b,
        coeff_c: c,
        coeff_d: d,
        i_plus,
        i_minus,
        w_eig_plus: (0.5 * (i_plus + i_minus)).powi(2),
        w_eig_minus: (0.5 * (i_plus - i_minus)).powi(2),
        s_w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    #[test]
    fn unit_strengths_right_angles() {
        let q = StrengthQuad::uniform(1.0).unwrap();
        let wb = w_bundle(&q, FRAC_PI_2, FRAC_PI_2).unwrap();
        assert_eq!([wb.coeff_a, wb.coeff_b, wb.coeff_c, wb.coeff_d], [2.0; 4]);
        assert!(wb.w.max_abs_diff(&Mat2::from_rows([[1.0, 1.0], [1.0, -1.0]])) < 1e-15);
        assert!((wb.i_plus - 2.0 * SQRT_2).abs() < 1e-14);
        assert!(wb.i_minus.abs() < 1e-14);
    }

    #[test]
    fn zero_strengths() {
        let q = StrengthQuad::uniform(0.0).unwrap();
        let wb = w_bundle(&q, 1.0, 2.0).unwrap();
        assert_eq!((wb.i_plus, wb.i_minus), (0.0, 0.0));
    }

    #[test]
    fn rejects_angles_out_of_range() {
        let q = StrengthQuad::uniform(0.5).unwrap();
        assert!(w_bundle(&q, -0.1, 1.0).is_err());
        assert!(w_bundle(&q, 1.0, 3.2).is_err());
        assert!(w_bundle(&q, f64::NAN, 1.0).is_err());
        assert!(w_bundle(&q, PI + 1e-13, 0.0).is_ok());
    }

    fn strength() -> impl Strategy<Value = f64> {
        0.0..=1.0f64
    }

    fn quad() -> impl Strategy<Value = StrengthQuad> {
        (strength(), strength(), strength(), strength())
            .prop_map(|(a, b, c, d)| StrengthQuad::new(a, b, c, d).unwrap())
    }

    proptest! {
        #[test]
        fn closed_form_matches_svd(q in quad(), th in 0.0..=PI, ph in 0.0..=PI) {
            let wb = w_bundle(&q, th, ph).unwrap();
            prop_assert!(wb.i_plus >= wb.i_minus && wb.i_minus >= 0.0);
            prop_assert!((wb.i_plus - wb.s_w[0] - wb.s_w[1]).abs() < 1e-10);
            prop_assert!((wb.i_minus - wb.s_w[0] + wb.s_w[1]).abs() < 1e-10);
            let lhs = wb.i_plus.powi(2) - wb.i_minus.powi(2);
            prop_assert!((lhs - 4.0 * wb.det().abs()).abs() < 1e-10);
        }

        #[test]
        fn equal_strengths_eigenvalues(sa in strength(), sb in strength(), th in 0.0..=PI, ph in 0.0..=PI) {
            let q = StrengthQuad::per_side(sa, sb).unwrap();
            let wb = w_bundle(&q, th, ph).unwrap();
            let root = (1.0 - (th.sin() * ph.sin()).powi(2)).max(0.0).sqrt();
            let k = 2.0 * sa * sa * sb * sb;
            prop_assert!((wb.w_eig_plus - k * (1.0 + root)).abs() < 1e-10);
            prop_assert!((wb.w_eig_minus - k * (1.0 - root)).abs() < 1e-10);
        }
    }
}
