//! Bounds with closed-form optimal angles for restricted strength patterns.

use serde::Serialize;

use super::{j_max, require_t_state, top_singular_values, BoundReport, CriterionId};
use crate::error::{invalid, Error, Result};
use crate::model::{FanoState, StrengthQuad};
use std::f64::consts::FRAC_PI_2;

/// `s₁(T) = s₂(T)` is accepted within this tolerance.
pub const EQUAL_SINGULAR_TOL: f64 = 1e-8;

fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn unit_strength(name: &str, s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(invalid(format!("{name} = {s} must lie in [0, 1]")));
    }
    Ok(())
}

/// Equal-angle member `θ = φ ∈ [0, π/2]` of the optimal family
/// `sinθ sinφ = 2s₁s₂/(s₁²+s₂²)`.
pub fn cor1_angles(s: [f64; 2]) -> (f64, f64) {
    let r2 = s[0] * s[0] + s[1] * s[1];
    if r2 == 0.0 {
        return (FRAC_PI_2, FRAC_PI_2);
    }
    let a = (2.0 * s[0] * s[1] / r2).sqrt().min(1.0).asin();
    (a, a)
}

/// Equal strengths `s_a` for `X, X′` and `s_b` for `Y, Y′`.
pub fn cor1_bound(state: &FanoState, s_a: f64, s_b: f64) -> Result<BoundReport> {
    unit_strength("s_a", s_a)?;
    unit_strength("s_b", s_b)?;
    let s = top_singular_values(&state.t());
    let (th, ph) = cor1_angles(s);
    Ok(BoundReport::new(CriterionId::Cor1, 2.0 * s_a * s_b * s[0].hypot(s[1])).with_angles(th, ph))
}

pub fn cor4_bound(state: &FanoState, s_a: f64, s_b: f64) -> Result<BoundReport> {
    require_t_state(state)?;
    let base = cor1_bound(state, s_a, s_b)?;
    Ok(base.shifted(CriterionId::Cor4, 2.0 * (1.0 - s_a) * (1.0 - s_b)))
}

/// `S₀` at right angles, written through `i± `.
pub fn cor2_sufficient(state: &FanoState, q: &StrengthQuad) -> BoundReport {
    let StrengthQuad { sx, sxp, sy, syp } = *q;
    let ip = (sx * sy + sxp * syp).hypot(sx * syp + sxp * sy);
    let im = (sx * sy - sxp * syp).hypot(sx * syp - sxp * sy);
    let [s1, s2] = top_singular_values(&state.t());
    let value = 0.5 * (ip + im) * s1 + 0.5 * (ip - im) * s2;
    BoundReport::new(CriterionId::Cor2, value).with_angles(FRAC_PI_2, FRAC_PI_2)
}

/// Strength thresholds above which equal-strength observables can violate
/// the CHSH inequality: `(1/√R, 2/(1+R))` for unbiased and biased
/// observables on a T-state with `R = √(s₁²+s₂²)`.
pub fn strength_thresholds(radius_r: f64) -> Result<(f64, f64)> {
    if !(radius_r > 0.0) || !radius_r.is_finite() {
        return Err(invalid(format!("radius must be positive, got {radius_r}")));
    }
    Ok((1.0 / radius_r.sqrt(), 2.0 / (1.0 + radius_r)))
}

/// `θ = 2·atan(s₂ S_Y′ / (s₁ S_Y))`, `φ = π/2`.
pub fn thm3_angles(s: [f64; 2], sy: f64, syp: f64) -> (f64, f64) {
    let num = s[1] * syp;
    let den = s[0] * sy;
    let theta = if num == 0.0 && den == 0.0 { 0.0 } else { 2.0 * num.atan2(den) };
    (theta, FRAC_PI_2)
}

/// Equal strengths `s_a` on side A, `sy ≥ syp` on side B.
pub fn thm3_bound(
    state: &FanoState,
    s_a: f64,
    sy: f64,
    syp: f64,
    biased_tstate: bool,
) -> Result<BoundReport> {
    unit_strength("s_a", s_a)?;
    unit_strength("S_Y", sy)?;
    unit_strength("S_Y′", syp)?;
    if sy < syp {
        return Err(invalid(format!(
            "requires S_Y ≥ S_Y′ (got {sy} < {syp}); swap the labels of Y and Y′"
        )));
    }
    let s = top_singular_values(&state.t());
    let value = 2.0 * s_a * (s[0] * sy).hypot(s[1] * syp);
    let (th, ph) = thm3_angles(s, sy, syp);
    let report = BoundReport::new(CriterionId::Thm3, value).with_angles(th, ph);
    if biased_tstate {
        require_t_state(state)?;
        Ok(report.shifted(CriterionId::Thm3, 2.0 * (1.0 - s_a) * (1.0 - syp)))
    } else {
        Ok(report)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thm4Solution {
    /// Value per unit `s₁(T)`.
    pub value: f64,
    pub theta: f64,
    pub phi: f64,
    /// Whether the stationary (first) solution exists.
    pub first_branch: bool,
    /// `|ab|/c²` when `c > 0`.
    pub ratio: Option<f64>,
    /// Value per unit `s₁(T)` of the boundary solution, which always exists.
    pub boundary_value: f64,
}

/// Optimal angles and value of `S₀/s₁(T)` when `s₁(T) = s₂(T)`.
///
/// The branch test `|ΔX ΔY| ≤ 2c` is `|ab| ≤ c²` multiplied through by
/// `2/c`; unlike the latter it sends `c = 0` with unequal strengths to the
/// boundary solution.
pub fn thm4_solution(q: &StrengthQuad) -> Thm4Solution {
    let StrengthQuad { sx, sxp, sy, syp } = *q;
    let (sum_x, diff_x) = (sx * sx + sxp * sxp, sx * sx - sxp * sxp);
    let (sum_y, diff_y) = (sy * sy + syp * syp, sy * sy - syp * syp);
    let a = sx * sxp * diff_y;
    let b = sy * syp * diff_x;
    let c = 2.0 * sx * sxp * sy * syp;
    let ratio = (c > 0.0).then(|| (a * b).abs() / (c * c));
    let first_branch = (diff_x * diff_y).abs() <= 2.0 * c;
    let boundary_value = super::coefficients(q).iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    if first_branch {
        let cos_of = |num: f64, den: f64| if den > 0.0 { (num / den).clamp(-1.0, 1.0) } else { 0.0 };
        let ct = cos_of(sum_x * diff_y, 2.0 * sx * sxp * sum_y);
        let cp = cos_of(diff_x * sum_y, 2.0 * sy * syp * sum_x);
        Thm4Solution {
            value: (2.0 * sum_x * sum_y).sqrt(),
            theta: ct.acos(),
            phi: cp.acos(),
            first_branch,
            ratio,
            boundary_value,
        }
    } else {
        Thm4Solution {
            value: boundary_value,
            theta: sign(sy - syp).acos(),
            phi: sign(sx - sxp).acos(),
            first_branch,
            ratio,
            boundary_value,
        }
    }
}

pub fn thm4_bound(state: &FanoState, q: &StrengthQuad, biased_tstate: bool) -> Result<BoundReport> {
    let s = top_singular_values(&state.t());
    if (s[0] - s[1]).abs() > EQUAL_SINGULAR_TOL {
        return Err(Error::Domain(format!(
            "requires s₁(T) = s₂(T), got {} and {}",
            s[0], s[1]
        )));
    }
    let sol = thm4_solution(q);
    let mut report = BoundReport::new(CriterionId::Thm4, s[0] * sol.value)
        .with_angles(sol.theta, sol.phi)
        .with_note(if sol.first_branch {
            "stationary solution"
        } else {
            "boundary solution"
        });
    if let Some(r) = sol.ratio {
        report = report.with_note(format!("|ab|/c² = {r:.6}"));
    }
    if biased_tstate {
        require_t_state(state)?;
        report = report.shifted(CriterionId::Thm4, j_max(q));
    }
    Ok(report)
}
