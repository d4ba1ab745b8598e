//! Exact correlation expectations and CHSH values.

use serde::Serialize;

use crate::linalg::{dot, outer, Mat4};
use crate::model::{FanoState, Observable, Scenario};

/// `⟨XY⟩ = (B_X, S_X xᵀ) Θ (B_Y, S_Y y)ᵀ`.
pub fn expectation(obs_a: &Observable, obs_b: &Observable, state: &FanoState) -> f64 {
    let theta = state.theta_matrix();
    let v = theta.mul_vec(&obs_b.fano_vector());
    dot(&obs_a.fano_vector(), &v)
}

/// The four CHSH parameters related by relabelling `X ↔ X′` and `Y ↔ Y′`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshVariants {
    /// `|⟨XY⟩ + ⟨XY′⟩ + ⟨X′Y⟩ − ⟨X′Y′⟩|`
    pub canonical: f64,
    pub swap_x: f64,
    pub swap_y: f64,
    pub swap_both: f64,
}

impl ChshVariants {
    pub fn max(&self) -> f64 {
        self.canonical
            .max(self.swap_x)
            .max(self.swap_y)
            .max(self.swap_both)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.canonical, self.swap_x, self.swap_y, self.swap_both]
    }
}

fn canonical(s: &Scenario, state: &FanoState) -> f64 {
    (expectation(&s.x, &s.y, state) + expectation(&s.x, &s.yp, state)
        + expectation(&s.xp, &s.y, state)
        - expectation(&s.xp, &s.yp, state))
    .abs()
}

/// Canonical CHSH parameter only.
pub fn chsh_value(scenario: &Scenario, state: &FanoState) -> f64 {
    canonical(scenario, state)
}

pub fn chsh(scenario: &Scenario, state: &FanoState) -> ChshVariants {
    ChshVariants {
        canonical: canonical(scenario, state),
        swap_x: canonical(&scenario.relabeled(true, false), state),
        swap_y: canonical(&scenario.relabeled(false, true), state),
        swap_both: canonical(&scenario.relabeled(true, true), state),
    }
}

/// `N = u_X u_Yᵀ + u_X u_Y′ᵀ + u_X′ u_Yᵀ − u_X′ u_Y′ᵀ` with `u = (B, S x)`.
pub fn chsh_n_matrix(s: &Scenario) -> Mat4 {
    let (ux, uxp) = (s.x.fano_vector(), s.xp.fano_vector());
    let (uy, uyp) = (s.y.fano_vector(), s.yp.fano_vector());
    outer(&ux, &uy) + outer(&ux, &uyp) + outer(&uxp, &uy) - outer(&uxp, &uyp)
}

/// `|trace(Θ Nᵀ)|`, algebraically equal to the canonical CHSH value.
pub fn chsh_matrix_form(scenario: &Scenario, state: &FanoState) -> f64 {
    let theta = state.theta_matrix();
    let n = chsh_n_matrix(scenario);
    (theta * n.transpose()).trace().abs()
}

/// `J = B_X B_Y + B_X B_Y′ + B_X′ B_Y − B_X′ B_Y′`.
pub fn bias_term(biases: [f64; 4]) -> f64 {
    let [bx, bxp, by, byp] = biases;
    bx * by + bx * byp + bxp * by - bxp * byp
}

/// The direction-dependent part of the CHSH sum on a T-state:
/// `S_X S_Y xᵀTy + S_X S_Y′ xᵀTy′ + S_X′ S_Y x′ᵀTy − S_X′ S_Y′ x′ᵀTy′`
/// (without the absolute value).
pub fn direction_term(s: &Scenario, state: &FanoState) -> f64 {
    let t = state.t();
    let term = |a: &Observable, b: &Observable| {
        a.strength() * b.strength() * dot(&a.direction(), &t.mul_vec(&b.direction()))
    };
    term(&s.x, &s.y) + term(&s.x, &s.yp) + term(&s.xp, &s.y) - term(&s.xp, &s.yp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat3;
    use crate::model::{random_observable_with, random_state_with, rng_from_seed, singlet, StateKind};
    use num_complex::Complex64;

    /// `trace(ρ X⊗Y)` with explicit 4×4 complex matrices.
    fn density_oracle(x: &Observable, y: &Observable, state: &FanoState) -> f64 {
        let rho = state.density_matrix();
        let op = crate::model::kron2(&x.operator(), &y.operator());
        let mut tr = Complex64::new(0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                tr += rho[i][j] * op[j][i];
            }
        }
        assert!(tr.im.abs() < 1e-12);
        tr.re
    }

    fn tsirelson_scenario() -> Scenario {
        let r = 1.0 / 2f64.sqrt();
        let p = |d| Observable::projective(d).unwrap();
        Scenario::new(
            p([0.0, 0.0, 1.0]),
            p([1.0, 0.0, 0.0]),
            p([-r, 0.0, -r]),
            p([r, 0.0, -r]),
        )
    }

    #[test]
    fn spin_z_on_singlet() {
        let z = Observable::projective([0.0, 0.0, 1.0]).unwrap();
        assert_eq!(expectation(&z, &z, &singlet()), -1.0);
    }

    #[test]
    fn coins_on_uncorrelated_state() {
        let state = FanoState::t_state(Mat3::zeros()).unwrap();
        let x = Observable::coin(0.3).unwrap();
        let y = Observable::coin(-0.6).unwrap();
        assert!((expectation(&x, &y, &state) - 0.3 * -0.6).abs() < 1e-16);
    }

    #[test]
    fn expectation_matches_density_matrix() {
        let mut rng = rng_from_seed(99);
        for i in 0..300 {
            let kind = [StateKind::General, StateKind::Tstate, StateKind::TwoQubitPure][i % 3];
            let state = random_state_with(&mut rng, kind);
            let x = random_observable_with(&mut rng, None, false);
            let y = random_observable_with(&mut rng, None, false);
            let e = expectation(&x, &y, &state);
            assert!((e - density_oracle(&x, &y, &state)).abs() < 1e-10);
            assert!(e.abs() <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn tsirelson_value() {
        let v = chsh(&tsirelson_scenario(), &singlet());
        assert!((v.canonical - 2.0 * 2f64.sqrt()).abs() < 1e-14, "{v:?}");
        assert!((chsh_matrix_form(&tsirelson_scenario(), &singlet()) - v.canonical).abs() < 1e-14);
    }

    #[test]
    fn biased_coins_give_two_b_squared() {
        let state = FanoState::t_state(Mat3::zeros()).unwrap();
        for b in [0.0, 0.3, -0.7, 1.0] {
            let c = Observable::coin(b).unwrap();
            let s = Scenario::new(c, c, c, c);
            assert!((chsh_value(&s, &state) - 2.0 * b * b).abs() < 1e-15);
            assert!((chsh_matrix_form(&s, &state) - 2.0 * b * b).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_observables_give_zero() {
        let c = Observable::coin(0.0).unwrap();
        let s = Scenario::new(c, c, c, c);
        assert_eq!(chsh_matrix_form(&s, &singlet()), 0.0);
    }

    #[test]
    fn matrix_form_agrees() {
        let mut rng = rng_from_seed(17);
        for _ in 0..1000 {
            let state = random_state_with(&mut rng, StateKind::General);
            let mut o = || random_observable_with(&mut rng, None, false);
            let s = Scenario::new(o(), o(), o(), o());
            assert!((chsh_value(&s, &state) - chsh_matrix_form(&s, &state)).abs() < 1e-12);
        }
    }

    #[test]
    fn t_state_decomposition() {
        let mut rng = rng_from_seed(23);
        for _ in 0..200 {
            let state = random_state_with(&mut rng, StateKind::Tstate);
            let mut o = || random_observable_with(&mut rng, None, false);
            let s = Scenario::new(o(), o(), o(), o());
            let split = (direction_term(&s, &state) + bias_term(s.biases())).abs();
            assert!((split - chsh_value(&s, &state)).abs() < 1e-12);
        }
    }

    #[test]
    fn variants_are_relabelings() {
        let s = tsirelson_scenario();
        let v = chsh(&s, &singlet());
        assert_eq!(v.swap_x, chsh(&s.relabeled(true, false), &singlet()).canonical);
        assert!(v.as_array().iter().all(|x| *x >= 0.0));
    }
}
