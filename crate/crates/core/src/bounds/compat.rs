//! Joint measurability of two observables on the same qubit.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, lin_comb, norm};
use crate::model::{Observable, CONSTRAINT_TOL};

/// Every inequality below is accepted when violated by at most this much.
pub const COMPAT_SLACK: f64 = 1e-10;

/// `½√((1+B)² − S²) + ½√((1−B)² − S²)`, radicands clamped at zero.
pub fn max_reversibility(x: &Observable) -> f64 {
    let (b, s) = (x.bias(), x.strength());
    let r = |c: f64| (c * c - s * s).max(0.0).sqrt();
    0.5 * r(1.0 + b) + 0.5 * r(1.0 - b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BuschForms {
    /// `|Sx + S′x′| + |Sx − S′x′| ≤ 2`.
    pub norm_form: bool,
    /// `S S′ sinθ ≤ √((1−S²)(1−S′²))`.
    pub sine_form: bool,
    /// `2 − (|Sx + S′x′| + |Sx − S′x′|)`.
    pub norm_margin: f64,
    pub sine_margin: f64,
}

fn require_unbiased(x: &Observable, xp: &Observable) -> Result<()> {
    if x.bias().abs() >= CONSTRAINT_TOL || xp.bias().abs() >= CONSTRAINT_TOL {
        return Err(Error::Domain(format!(
            "the two-term criterion needs unbiased observables (biases {}, {}); use compat_full",
            x.bias(),
            xp.bias()
        )));
    }
    Ok(())
}

fn sum_diff_norms(x: &Observable, xp: &Observable) -> (f64, f64) {
    let (u, v) = (x.direction(), xp.direction());
    let (s, sp) = (x.strength(), xp.strength());
    (norm(&lin_comb(s, &u, sp, &v)), norm(&lin_comb(s, &u, -sp, &v)))
}

/// Both forms of the unbiased criterion. They are algebraically equivalent
/// but not equally sensitive near the boundary, so their verdicts are
/// reported separately.
pub fn busch_forms(x: &Observable, xp: &Observable) -> Result<BuschForms> {
    require_unbiased(x, xp)?;
    let (plus, minus) = sum_diff_norms(x, xp);
    let norm_margin = 2.0 - (plus + minus);
    let (s, sp) = (x.strength(), xp.strength());
    let (u, v) = (x.direction(), xp.direction());
    let cross = crate::linalg::cross(&u, &v);
    let sin_theta = norm(&cross);
    let sine_margin = ((1.0 - s * s) * (1.0 - sp * sp)).max(0.0).sqrt() - s * sp * sin_theta;
    Ok(BuschForms {
        norm_form: norm_margin >= -COMPAT_SLACK,
        sine_form: sine_margin >= -COMPAT_SLACK,
        norm_margin,
        sine_margin,
    })
}

/// Necessary and sufficient for unbiased observables.
pub fn compat_busch(x: &Observable, xp: &Observable) -> Result<bool> {
    Ok(busch_forms(x, xp)?.norm_form)
}

/// Necessary for arbitrary observables.
pub fn compat_necessary(x: &Observable, xp: &Observable) -> bool {
    let (plus, minus) = sum_diff_norms(x, xp);
    let (b, bp) = (x.bias(), xp.bias());
    plus.max((b + bp).abs()) + minus.max((b - bp).abs()) <= 2.0 + COMPAT_SLACK
}

/// `B²/ℛ²`, with the `ℛ = 0` singularity (only for extremal observables)
/// resolved as `0` for `B = 0` and `+∞` otherwise.
fn bias_ratio(b: f64, r: f64) -> f64 {
    if r > 0.0 {
        b * b / (r * r)
    } else if b == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Necessary and sufficient for arbitrary observables.
pub fn compat_full(x: &Observable, xp: &Observable) -> bool {
    compat_full_terms(x, xp).0
}

fn compat_full_terms(x: &Observable, xp: &Observable) -> (bool, f64, f64, bool) {
    let (r, rp) = (max_reversibility(x), max_reversibility(xp));
    let first = 1.0 - r * r - rp * rp;
    let second = 1.0 - bias_ratio(x.bias(), r) - bias_ratio(xp.bias(), rp);
    let singular = second.is_infinite();
    let lhs = if singular {
        // sign of the product decided by the finite factor
        if first > 0.0 {
            f64::NEG_INFINITY
        } else if first < 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        first * second
    };
    let cos = dot(&x.direction(), &xp.direction());
    let rhs = (x.strength() * xp.strength() * cos - (x.bias() * xp.bias()).abs()).powi(2);
    (lhs <= rhs + COMPAT_SLACK, lhs, rhs, singular)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompatReport {
    /// Present only for unbiased pairs.
    pub busch: Option<BuschForms>,
    pub necessary: bool,
    pub full: bool,
    pub max_reversibility: (f64, f64),
    pub full_lhs: f64,
    pub full_rhs: f64,
    pub notes: String,
}

pub fn compat_report(x: &Observable, xp: &Observable) -> CompatReport {
    let (full, full_lhs, full_rhs, singular) = compat_full_terms(x, xp);
    let mut notes = Vec::new();
    if singular {
        notes.push("zero reversibility with nonzero bias; bias term taken as infinite".to_string());
    }
    let busch = busch_forms(x, xp).ok();
    if let Some(b) = busch {
        if b.norm_form != b.sine_form {
            notes.push(format!(
                "boundary case: norm and sine forms disagree (margins {:.3e}, {:.3e})",
                b.norm_margin, b.sine_margin
            ));
        }
    }
    CompatReport {
        busch,
        necessary: compat_necessary(x, xp),
        full,
        max_reversibility: (max_reversibility(x), max_reversibility(xp)),
        full_lhs,
        full_rhs,
        notes: notes.join("; "),
    }
}
