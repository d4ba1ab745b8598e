//! Optimal relative angles for given strengths: closed forms where known,
//! otherwise a two-parameter numerical search.

use serde::Serialize;

use super::special::{cor1_angles, thm3_angles, thm4_solution, EQUAL_SINGULAR_TOL};
use super::{j_max, require_t_state, s0_value, top_singular_values, BoundReport, CriterionId};
use crate::error::Result;
use crate::model::{FanoState, StrengthQuad};
use crate::oracle::NelderMead;
use std::f64::consts::{FRAC_PI_2, PI};

const GRID: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleSearch {
    pub theta: f64,
    pub phi: f64,
    pub value: f64,
}

fn fold_angle(t: f64) -> f64 {
    t.cos().clamp(-1.0, 1.0).acos()
}

/// Maximizes `S₀(θ, φ)` for correlation singular values `s` by a grid scan
/// followed by simplex refinement from the best few grid points.
pub fn maximize_s0_angles(s: [f64; 2], q: &StrengthQuad) -> AngleSearch {
    let value = |th: f64, ph: f64| s0_value(s, q, th, ph).unwrap_or(f64::NEG_INFINITY);
    let mut grid: Vec<AngleSearch> = Vec::with_capacity((GRID + 1) * (GRID + 1));
    for i in 0..=GRID {
        for j in 0..=GRID {
            let (theta, phi) = (PI * i as f64 / GRID as f64, PI * j as f64 / GRID as f64);
            grid.push(AngleSearch { theta, phi, value: value(theta, phi) });
        }
    }
    grid.sort_by(|a, b| b.value.total_cmp(&a.value));
    let nm = NelderMead {
        initial_step: PI / GRID as f64,
        x_tol: 1e-11,
        ..Default::default()
    };
    let mut best = grid[0];
    for start in grid.iter().take(4) {
        let m = nm.minimize_polished(
            |p| -value(fold_angle(p[0]), fold_angle(p[1])),
            &[start.theta, start.phi],
        );
        if -m.f > best.value {
            best = AngleSearch {
                theta: fold_angle(m.x[0]),
                phi: fold_angle(m.x[1]),
                value: -m.f,
            };
        }
    }
    best
}

fn best_of(s: [f64; 2], q: &StrengthQuad, candidates: &[(f64, f64)]) -> AngleSearch {
    candidates
        .iter()
        .map(|&(theta, phi)| AngleSearch {
            theta,
            phi,
            value: s0_value(s, q, theta, phi).unwrap_or(f64::NEG_INFINITY),
        })
        .max_by(|a, b| a.value.total_cmp(&b.value))
        .expect("at least one candidate")
}

/// Best `S₀` (or `S_T` when `biased_tstate`) over all relative angles, with
/// the maximizing angles. Uses the closed-form optimal angles when the
/// strengths or the state allow it.
pub fn optimal_bound(state: &FanoState, q: &StrengthQuad, biased_tstate: bool) -> Result<BoundReport> {
    if biased_tstate {
        require_t_state(state)?;
    }
    let s = top_singular_values(&state.t());
    let StrengthQuad { sx, sxp, sy, syp } = *q;
    let (found, method) = if sx == sxp && sy == syp {
        (best_of(s, q, &[cor1_angles(s)]), "equal strengths per side")
    } else if sx == sxp {
        let (th, _) = thm3_angles(s, sy.max(syp), sy.min(syp));
        (
            best_of(s, q, &[(th, FRAC_PI_2), (PI - th, FRAC_PI_2)]),
            "equal strengths on side A",
        )
    } else if sy == syp {
        let (ph, _) = thm3_angles(s, sx.max(sxp), sx.min(sxp));
        (
            best_of(s, q, &[(FRAC_PI_2, ph), (FRAC_PI_2, PI - ph)]),
            "equal strengths on side B",
        )
    } else if (s[0] - s[1]).abs() <= EQUAL_SINGULAR_TOL {
        let sol = thm4_solution(q);
        (best_of(s, q, &[(sol.theta, sol.phi)]), "equal singular values")
    } else {
        (maximize_s0_angles(s, q), "numerical search")
    };
    let report = BoundReport::new(CriterionId::Thm1, found.value)
        .with_angles(found.theta, found.phi)
        .with_note(format!("optimal angles: {method}"));
    Ok(if biased_tstate {
        report.shifted(CriterionId::Thm2, j_max(q))
    } else {
        report
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::singlet;

    fn diag(s1: f64, s2: f64) -> FanoState {
        crate::model::with_top_singular_values(s1, s2).unwrap()
    }

    #[test]
    fn numeric_search_recovers_closed_forms() {
        let cases = [
            (diag(0.9, 0.3), StrengthQuad::per_side(0.8, 0.6).unwrap()),
            (diag(0.9, 0.3), StrengthQuad::new(0.7, 0.7, 0.9, 0.4).unwrap()),
            (diag(0.9, 0.3), StrengthQuad::new(0.9, 0.4, 0.6, 0.6).unwrap()),
            (singlet(), StrengthQuad::new(1.0, 0.8, 1.0, 0.9).unwrap()),
            (singlet(), StrengthQuad::new(0.2, 0.9, 0.95, 0.1).unwrap()),
        ];
        for (state, q) in cases {
            let closed = optimal_bound(&state, &q, false).unwrap();
            let num = maximize_s0_angles(top_singular_values(&state.t()), &q);
            assert!((closed.value - num.value).abs() < 1e-9, "{q:?}: {} vs {}", closed.value, num.value);
        }
    }

    #[test]
    fn biased_adds_j_max() {
        let q = StrengthQuad::new(0.9, 0.6, 0.8, 0.5).unwrap();
        let a = optimal_bound(&singlet(), &q, false).unwrap();
        let b = optimal_bound(&singlet(), &q, true).unwrap();
        assert_eq!(b.criterion_id, CriterionId::Thm2);
        assert!((b.value - a.value - j_max(&q)).abs() < 1e-14);
        let product = crate::model::product([0.0, 0.0, 1.0], [0.0, 0.0, 1.0]).unwrap();
        assert!(optimal_bound(&product, &q, true).is_err());
    }

    #[test]
    fn angles_normalized() {
        let r = maximize_s0_angles([0.8, 0.5], &StrengthQuad::new(0.9, 0.2, 0.4, 0.7).unwrap());
        assert!((0.0..=PI).contains(&r.theta) && (0.0..=PI).contains(&r.phi));
    }
}
