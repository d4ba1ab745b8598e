//! Explicit measurement configurations attaining the tight bounds.
//!
//! Directions are first laid out in a canonical frame with the requested
//! relative angles, then rotated by orthogonal maps chosen from the singular
//! frames of `W` and `T` so that the direction term of the CHSH sum equals
//! `Σ sⱼ(W) sⱼ(T)`.

use serde::{Deserialize, Serialize};

use crate::bounds::{
    self, cor1_angles, j_max, s0_value, thm4_solution, top_singular_values, w_matrix,
    EQUAL_SINGULAR_TOL,
};
use crate::chsh::chsh_value;
use crate::error::{invalid, Error, Result};
use crate::linalg::{lin_comb, Frame3, Mat3, Svd, Vec3};
use crate::model::{FanoState, Scenario, StrengthQuad};

/// Attained values more than this below the target are a failed construction.
pub const ATTAINMENT_FAILURE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RecipeId {
    SvdAlignment,
    Thm3,
    Cor1,
    Thm4,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AchievingConfig {
    pub scenario: Scenario,
    pub target_bound: f64,
    pub attained_chsh: f64,
    pub recipe_id: RecipeId,
}

fn half_angle_pair(angle: f64) -> (Vec3, Vec3) {
    let (s, c) = (0.5 * angle).sin_cos();
    ([c, s, 0.0], [c, -s, 0.0])
}

/// `[x, x′, y, y′]` in the standard frame with `x·x′ = cosθ`, `y·y′ = cosφ`.
pub fn reference_frames(theta: f64, phi: f64) -> Result<[Vec3; 4]> {
    let theta = bounds::check_angle("θ", theta)?;
    let phi = bounds::check_angle("φ", phi)?;
    let (x, xp) = half_angle_pair(theta);
    let (y, yp) = half_angle_pair(phi);
    Ok([x, xp, y, yp])
}

/// `M_jk = a_jᵀ T b_k` for the frame vectors `a_j` of side A and `b_k` of
/// side B.
pub fn m_matrix(state: &FanoState, frame_a: &Frame3, frame_b: &Frame3) -> Mat3 {
    frame_a.as_matrix().transpose() * state.t() * frame_b.as_matrix()
}

fn embed(w: &crate::linalg::Mat2) -> Mat3 {
    let mut m = Mat3::zeros();
    for i in 0..2 {
        for j in 0..2 {
            m.0[i][j] = w.0[i][j];
        }
    }
    m
}

/// The orthogonal maps `(O₁, O₂)` aligning the singular frames of the
/// embedded `W` with those of `T`.
pub fn alignment_maps(state: &FanoState, q: &StrengthQuad, theta: f64, phi: f64) -> Result<(Mat3, Mat3)> {
    let w = embed(&w_matrix(q, theta, phi)).svd()?;
    let t = state.t().svd()?;
    Ok((t.u * w.u.transpose(), t.v * w.v.transpose()))
}

fn finish(
    state: &FanoState,
    scenario: Scenario,
    target_bound: f64,
    recipe_id: RecipeId,
) -> Result<AchievingConfig> {
    let attained_chsh = chsh_value(&scenario, state);
    if !(attained_chsh >= target_bound - ATTAINMENT_FAILURE) {
        return Err(Error::ConstructionFailure(format!(
            "{recipe_id:?} attained {attained_chsh} below target {target_bound} \
             (θ = {}, φ = {}, strengths {:?}, biases {:?})",
            scenario.theta(),
            scenario.phi(),
            scenario.strengths().as_array(),
            scenario.biases()
        )));
    }
    Ok(AchievingConfig {
        scenario,
        target_bound,
        attained_chsh,
        recipe_id,
    })
}

fn rotated_directions(state: &FanoState, q: &StrengthQuad, theta: f64, phi: f64) -> Result<[Vec3; 4]> {
    let [x, xp, y, yp] = reference_frames(theta, phi)?;
    let (o1, o2) = alignment_maps(state, q, theta, phi)?;
    Ok([o1.mul_vec(&x), o1.mul_vec(&xp), o2.mul_vec(&y), o2.mul_vec(&yp)])
}

/// Unbiased observables with the given strengths and relative angles whose
/// CHSH value equals `S₀(θ, φ)`.
pub fn achieving_directions(
    state: &FanoState,
    q: &StrengthQuad,
    theta: f64,
    phi: f64,
) -> Result<AchievingConfig> {
    let target = s0_value(top_singular_values(&state.t()), q, theta, phi)?;
    let dirs = rotated_directions(state, q, theta, phi)?;
    let scenario = Scenario::from_parts(q, [0.0; 4], dirs)?;
    finish(state, scenario, target, RecipeId::SvdAlignment)
}

fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Extremal biases `|B| = 1 − S` with signs chosen so that the bias term
/// equals [`j_max`]. `beta` (`±1`) fixes the sign of `B_Y`; the two choices
/// are mirror images.
pub fn achieving_biases(q: &StrengthQuad, beta: f64) -> Result<[f64; 4]> {
    if beta != 1.0 && beta != -1.0 {
        return Err(invalid(format!("β must be ±1, got {beta}")));
    }
    let [bx, bxp, by, byp] = q.as_array().map(|s| 1.0 - s);
    let beta_p = beta * sign(bx - bxp);
    let alpha = sign(beta * by + beta_p * byp);
    let alpha_p = sign(beta * by - beta_p * byp);
    Ok([alpha * bx, alpha_p * bxp, beta * by, beta_p * byp])
}

/// Biased observables on a T-state attaining `S₀(θ, φ) + J_max`.
pub fn achieving_scenario_tstate(
    state: &FanoState,
    q: &StrengthQuad,
    theta: f64,
    phi: f64,
    beta: f64,
) -> Result<AchievingConfig> {
    bounds::require_t_state(state)?;
    let biases = achieving_biases(q, beta)?;
    let target = s0_value(top_singular_values(&state.t()), q, theta, phi)? + j_max(q);
    let dirs = rotated_directions(state, q, theta, phi)?;
    let scenario = Scenario::from_parts(q, biases, dirs)?;
    finish(state, scenario, target, RecipeId::SvdAlignment)
}

/// Equal strengths per side at the equal-angle optimum; biased (T-states
/// only) when `biased_tstate`.
pub fn cor1_achieving(state: &FanoState, s_a: f64, s_b: f64, biased_tstate: bool) -> Result<AchievingConfig> {
    let q = StrengthQuad::per_side(s_a, s_b)?;
    let (th, ph) = cor1_angles(top_singular_values(&state.t()));
    let mut cfg = if biased_tstate {
        achieving_scenario_tstate(state, &q, th, ph, 1.0)?
    } else {
        achieving_directions(state, &q, th, ph)?
    };
    cfg.recipe_id = RecipeId::Cor1;
    Ok(cfg)
}

/// Optimal configuration when `s₁(T) = s₂(T)`.
pub fn thm4_achieving(state: &FanoState, q: &StrengthQuad, biased_tstate: bool) -> Result<AchievingConfig> {
    let s = top_singular_values(&state.t());
    if (s[0] - s[1]).abs() > EQUAL_SINGULAR_TOL {
        return Err(Error::Domain(format!("requires s₁(T) = s₂(T), got {} and {}", s[0], s[1])));
    }
    let sol = thm4_solution(q);
    let mut cfg = if biased_tstate {
        achieving_scenario_tstate(state, q, sol.theta, sol.phi, 1.0)?
    } else {
        achieving_directions(state, q, sol.theta, sol.phi)?
    };
    // the closed form uses s₁ for both singular values
    let target = s[0] * sol.value + if biased_tstate { j_max(q) } else { 0.0 };
    cfg.target_bound = target;
    cfg.recipe_id = RecipeId::Thm4;
    finish(state, cfg.scenario, target, RecipeId::Thm4)
}

/// Equal strengths `s_a` on side A and `sy ≥ syp` on side B: `x, x′`
/// straddle the two leading left singular vectors of `T`, `y, y′` are the
/// corresponding right singular vectors.
pub fn thm3_achieving(state: &FanoState, s_a: f64, sy: f64, syp: f64) -> Result<AchievingConfig> {
    let target = bounds::thm3_bound(state, s_a, sy, syp, false)?;
    let svd = state.t().svd()?;
    let (x1, x2) = (svd.u.col(0), svd.u.col(1));
    // For s₂ = 0 the second right singular vector is still a unit vector
    // orthogonal to the first, which is all the construction needs.
    let (y, yp) = (svd.v.col(0), svd.v.col(1));
    let (theta, _) = target.optimal_angles.expect("thm3 reports angles");
    let (s, c) = (0.5 * theta).sin_cos();
    let x = lin_comb(c, &x1, s, &x2);
    let xp = lin_comb(c, &x1, -s, &x2);
    let q = StrengthQuad::new(s_a, s_a, sy, syp)?;
    let scenario = Scenario::from_parts(&q, [0.0; 4], [x, xp, y, yp])?;
    finish(state, scenario, target.value, RecipeId::Thm3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{cor4_bound, j_max, st_bound, thm3_bound, thm4_bound};
    use crate::chsh::{bias_term, chsh};
    use crate::linalg::{angle_between, dot};
    use crate::model::{
        bell_diagonal, product, random_rotation, random_state_with, random_strengths, rng_from_seed,
        singlet, StateKind,
    };
    use proptest::prelude::*;
    use rand::Rng;
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    fn random_frame_for_tests<R: Rng>(rng: &mut R) -> Frame3 {
        Frame3::from_rotation(&random_rotation(rng)).unwrap()
    }

    #[test]
    fn reference_frame_angles() {
        for (th, ph) in [(0.0, PI), (FRAC_PI_2, 1.0), (PI, 0.3)] {
            let [x, xp, y, yp] = reference_frames(th, ph).unwrap();
            assert!((dot(&x, &xp) - th.cos()).abs() < 1e-12);
            assert!((dot(&y, &yp) - ph.cos()).abs() < 1e-12);
        }
        let [x, xp, ..] = reference_frames(0.0, 0.0).unwrap();
        assert_eq!(x, xp);
        let [x, xp, ..] = reference_frames(PI, 0.0).unwrap();
        assert!(x.iter().zip(&xp).all(|(a, b)| (a + b).abs() < 1e-15));
    }

    #[test]
    fn m_matrix_examples() {
        let f = Frame3::standard();
        assert_eq!(m_matrix(&singlet(), &f, &f), Mat3::identity().scale(-1.0));
        let mut rng = rng_from_seed(3);
        for _ in 0..100 {
            let state = random_state_with(&mut rng, StateKind::General);
            let (fa, fb) = (random_frame_for_tests(&mut rng), random_frame_for_tests(&mut rng));
            let sm = m_matrix(&state, &fa, &fb).singular_values().unwrap();
            let st = state.correlation_singular_values();
            assert!(sm.iter().zip(&st).all(|(a, b)| (a - b).abs() < 1e-10));
        }
        let f = Frame3::standard();
        let m = m_matrix(&bell_diagonal(0.5, -0.3, 0.1).unwrap(), &f, &f);
        assert_eq!(m, Mat3::from_diag([0.5, -0.3, 0.1]));
    }

    #[test]
    fn singlet_examples() {
        let q = StrengthQuad::uniform(1.0).unwrap();
        let cfg = achieving_directions(&singlet(), &q, FRAC_PI_2, FRAC_PI_2).unwrap();
        assert!((cfg.attained_chsh - 2.0 * SQRT_2).abs() < 1e-12);

        let cfg = cor1_achieving(&singlet(), 0.9, 0.9, false).unwrap();
        assert!((cfg.attained_chsh - 2.0 * 0.81 * SQRT_2).abs() < 1e-12);

        let q = StrengthQuad::uniform(0.835).unwrap();
        let cfg = achieving_scenario_tstate(&singlet(), &q, FRAC_PI_2, FRAC_PI_2, 1.0).unwrap();
        assert!((cfg.attained_chsh - 2.0265).abs() < 1e-4 && cfg.attained_chsh > 2.0);
    }

    #[test]
    fn unit_strengths_need_no_biases() {
        let q = StrengthQuad::uniform(1.0).unwrap();
        assert_eq!(achieving_biases(&q, 1.0).unwrap(), [0.0; 4]);
        let a = achieving_scenario_tstate(&singlet(), &q, 1.0, 2.0, 1.0).unwrap();
        let b = achieving_directions(&singlet(), &q, 1.0, 2.0).unwrap();
        assert_eq!(a.scenario, b.scenario);
    }

    #[test]
    fn bias_examples() {
        let q0 = StrengthQuad::uniform(0.0).unwrap();
        let b = achieving_biases(&q0, 1.0).unwrap();
        assert!(b.iter().all(|x| x.abs() == 1.0));
        assert_eq!(bias_term(b), 2.0);
        let q = StrengthQuad::new(1.0, 0.5, 1.0, 0.5).unwrap();
        assert!((bias_term(achieving_biases(&q, 1.0).unwrap()) - 0.25).abs() < 1e-15);
        assert!(achieving_biases(&q, 0.5).is_err());
    }

    #[test]
    fn thm3_examples() {
        let cfg = thm3_achieving(&singlet(), 1.0, 1.0, 0.5).unwrap();
        assert!((cfg.attained_chsh - 2.0 * 1.25f64.sqrt()).abs() < 1e-12);
        assert!((cfg.scenario.phi() - FRAC_PI_2).abs() < 1e-10);

        let cfg = thm3_achieving(&singlet(), 0.9, 0.7, 0.7).unwrap();
        assert!((cfg.scenario.theta() - FRAC_PI_2).abs() < 1e-10);
        assert!((cfg.scenario.phi() - FRAC_PI_2).abs() < 1e-10);

        let rank_one = product([0.0, 0.0, 0.8], [0.6, 0.0, 0.0]).unwrap();
        let cfg = thm3_achieving(&rank_one, 0.9, 1.0, 0.0).unwrap();
        assert!((cfg.attained_chsh - 2.0 * 0.9 * 0.48).abs() < 1e-12);
        assert!(cfg.attained_chsh <= 2.0);
    }

    #[test]
    fn attainment_audit_s0_and_st() {
        let mut rng = rng_from_seed(2024);
        for i in 0..1000 {
            let kind = if i % 2 == 0 { StateKind::General } else { StateKind::Tstate };
            let state = random_state_with(&mut rng, kind);
            let q = random_strengths(&mut rng);
            let (th, ph) = (rng.random_range(0.0..=PI), rng.random_range(0.0..=PI));
            let cfg = achieving_directions(&state, &q, th, ph).unwrap();
            assert!((cfg.attained_chsh - cfg.target_bound).abs() < 1e-9, "trial {i}");
            // strengths, biases and angles preserved
            assert_eq!(cfg.scenario.strengths(), q);
            assert!((cfg.scenario.theta() - th).abs() < 1e-7);
            assert!((cfg.scenario.phi() - ph).abs() < 1e-7);
            assert!((dot(&cfg.scenario.x.direction(), &cfg.scenario.xp.direction()) - th.cos()).abs() < 1e-10);
            if kind == StateKind::Tstate {
                let cfg = achieving_scenario_tstate(&state, &q, th, ph, 1.0).unwrap();
                let target = st_bound(&state, &q, th, ph).unwrap().value;
                assert!((cfg.attained_chsh - target).abs() < 1e-9, "trial {i}");
                let mirror = achieving_scenario_tstate(&state, &q, th, ph, -1.0).unwrap();
                assert!((mirror.attained_chsh - target).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn trace_bound_chain() {
        let mut rng = rng_from_seed(5);
        for _ in 0..300 {
            let state = random_state_with(&mut rng, StateKind::General);
            let q = random_strengths(&mut rng);
            let (th, ph) = (rng.random_range(0.0..=PI), rng.random_range(0.0..=PI));
            let w = embed(&w_matrix(&q, th, ph));
            let sw = w.singular_values().unwrap();
            let st = state.correlation_singular_values();
            let bound = sw[0] * st[0] + sw[1] * st[1];
            let (fa, fb) = (random_frame_for_tests(&mut rng), random_frame_for_tests(&mut rng));
            let m = m_matrix(&state, &fa, &fb);
            assert!((w.transpose() * m).trace().abs() <= bound + 1e-12);
            let (o1, o2) = alignment_maps(&state, &q, th, ph).unwrap();
            let aligned = o1.transpose() * state.t() * o2;
            assert!(((w.transpose() * aligned).trace() - bound).abs() < 1e-10);
        }
    }

    #[test]
    fn closed_form_recipes_attain() {
        let mut rng = rng_from_seed(11);
        for _ in 0..300 {
            let state = random_state_with(&mut rng, StateKind::Tstate);
            let q = random_strengths(&mut rng);
            let cfg = cor1_achieving(&state, q.sx, q.sy, true).unwrap();
            let target = cor4_bound(&state, q.sx, q.sy).unwrap().value;
            assert!((cfg.attained_chsh - target).abs() < 1e-9);
            assert!((cfg.target_bound - target).abs() < 1e-12);

            let (hi, lo) = (q.sy.max(q.syp), q.sy.min(q.syp));
            let cfg = thm3_achieving(&state, q.sx, hi, lo).unwrap();
            let target = thm3_bound(&state, q.sx, hi, lo, false).unwrap().value;
            assert!((cfg.attained_chsh - target).abs() < 1e-9);

            let eq = random_state_with(&mut rng, StateKind::EqualSingular);
            for biased in [false, true] {
                let cfg = thm4_achieving(&eq, &q, biased).unwrap();
                let target = thm4_bound(&eq, &q, biased).unwrap().value;
                assert!((cfg.attained_chsh - target).abs() < 1e-9, "{q:?} {biased}");
                assert_eq!(cfg.recipe_id, RecipeId::Thm4);
            }
        }
    }

    #[test]
    fn relabelled_variants_respect_tilde_bound() {
        let mut rng = rng_from_seed(12);
        for _ in 0..200 {
            let state = random_state_with(&mut rng, StateKind::General);
            let q = random_strengths(&mut rng);
            let (th, ph) = (rng.random_range(0.0..=PI), rng.random_range(0.0..=PI));
            let cfg = achieving_directions(&state, &q, th, ph).unwrap();
            let tilde = crate::bounds::s0_tilde(&state, &q, th, ph).unwrap().value;
            assert!(chsh(&cfg.scenario, &state).max() <= tilde + 1e-9);
        }
    }

    #[test]
    fn recipe_ids_serialize() {
        assert_eq!(serde_json::to_string(&RecipeId::SvdAlignment).unwrap(), "\"svdAlignment\"");
        assert_eq!(serde_json::to_string(&RecipeId::Thm4).unwrap(), "\"thm4\"");
    }

    proptest! {
        #[test]
        fn bias_recipe_matches_j_max(sx in 0.0..=1.0f64, sxp in 0.0..=1.0f64, sy in 0.0..=1.0f64,
                                     syp in 0.0..=1.0f64, neg in any::<bool>()) {
            let q = StrengthQuad::new(sx, sxp, sy, syp).unwrap();
            let b = achieving_biases(&q, if neg { -1.0 } else { 1.0 }).unwrap();
            prop_assert!((bias_term(b) - j_max(&q)).abs() < 1e-12);
            for (bi, s) in b.iter().zip(q.as_array()) {
                prop_assert!((bi.abs() - (1.0 - s)).abs() < 1e-15);
            }
        }

        #[test]
        fn construction_keeps_relative_angles(th in 0.0..=PI, ph in 0.0..=PI, seed in 0u64..1000) {
            let state = crate::model::random_state(seed, StateKind::General);
            let q = random_strengths(&mut rng_from_seed(seed));
            let cfg = achieving_directions(&state, &q, th, ph).unwrap();
            let s = &cfg.scenario;
            prop_assert!((dot(&s.x.direction(), &s.xp.direction()) - th.cos()).abs() < 1e-10);
            prop_assert!((dot(&s.y.direction(), &s.yp.direction()) - ph.cos()).abs() < 1e-10);
            prop_assert!((angle_between(&s.x.direction(), &s.xp.direction()) - th).abs() < 1e-6);
        }
    }
}
