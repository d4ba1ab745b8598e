//! Closed-form upper bounds on the CHSH parameter for observables of given
//! strengths, the associated optimal angles, and joint-measurability
//! conditions for pairs of observables.
//!
//! Bounds come in two flavours: unbiased observables on an arbitrary state
//! (`S₀` and relatives) and arbitrary observables on a T-state (`S_T`, which
//! adds the bias contribution [`j_max`]).

mod angles;
mod compat;
mod special;
mod w;

pub(crate) use w::check_angle;

use serde::{Deserialize, Serialize};

pub use angles::{maximize_s0_angles, optimal_bound, AngleSearch};
pub use compat::{
    busch_forms, compat_busch, compat_full, compat_necessary, compat_report, max_reversibility,
    BuschForms, CompatReport, COMPAT_SLACK,
};
pub use special::{
    cor1_angles, cor1_bound, cor2_sufficient, cor4_bound, strength_thresholds, thm3_angles,
    thm3_bound, thm4_bound, thm4_solution, Thm4Solution, EQUAL_SINGULAR_TOL,
};
pub use w::{coefficients, i_squared, w_bundle, w_matrix, WBundle};

use crate::chsh::chsh_n_matrix;
use crate::error::{Error, Result};
use crate::linalg::{Mat3, Svd};
use crate::model::{FanoState, Scenario, StrengthQuad};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriterionId {
    Horodecki,
    Thm1,
    Thm2,
    Cor1,
    Cor2,
    Cor3,
    Cor4,
    Cor6,
    Thm3,
    Thm4,
    Sgen,
}

impl CriterionId {
    pub const ALL: [CriterionId; 11] = [
        CriterionId::Horodecki,
        CriterionId::Thm1,
        CriterionId::Thm2,
        CriterionId::Cor1,
        CriterionId::Cor2,
        CriterionId::Cor3,
        CriterionId::Cor4,
        CriterionId::Cor6,
        CriterionId::Thm3,
        CriterionId::Thm4,
        CriterionId::Sgen,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CriterionId::Horodecki => "horodecki",
            CriterionId::Thm1 => "thm1",
            CriterionId::Thm2 => "thm2",
            CriterionId::Cor1 => "cor1",
            CriterionId::Cor2 => "cor2",
            CriterionId::Cor3 => "cor3",
            CriterionId::Cor4 => "cor4",
            CriterionId::Cor6 => "cor6",
            CriterionId::Thm3 => "thm3",
            CriterionId::Thm4 => "thm4",
            CriterionId::Sgen => "sgen",
        }
    }
}

impl std::fmt::Display for CriterionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CriterionId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CriterionId::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown criterion `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub value: f64,
    pub criterion_id: CriterionId,
    /// `value > 2`, strictly.
    pub violated: bool,
    pub optimal_angles: Option<(f64, f64)>,
    pub notes: String,
}

impl BoundReport {
    pub fn new(criterion_id: CriterionId, value: f64) -> Self {
        BoundReport {
            value,
            criterion_id,
            violated: value > 2.0,
            optimal_angles: None,
            notes: String::new(),
        }
    }

    pub fn with_angles(mut self, theta: f64, phi: f64) -> Self {
        self.optimal_angles = Some((theta, phi));
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        let note = note.into();
        if !self.notes.is_empty() {
            self.notes.push_str("; ");
        }
        self.notes.push_str(&note);
        self
    }

    pub(crate) fn shifted(mut self, id: CriterionId, extra: f64) -> Self {
        self.value += extra;
        self.violated = self.value > 2.0;
        self.criterion_id = id;
        self
    }
}

/// `(s₁(T), s₂(T))`.
pub fn top_singular_values(t: &Mat3) -> [f64; 2] {
    let s = t.singular_values().expect("correlation matrix of a valid state is finite");
    [s[0], s[1]]
}

/// `H(T) = 2√(s₁² + s₂²)`.
pub fn horodecki(t: &Mat3) -> f64 {
    let [s1, s2] = top_singular_values(t);
    2.0 * s1.hypot(s2)
}

pub fn horodecki_report(state: &FanoState) -> BoundReport {
    BoundReport::new(CriterionId::Horodecki, horodecki(&state.t()))
}

pub(crate) fn require_t_state(state: &FanoState) -> Result<()> {
    if state.is_t_state() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "bound requires a T-state (vanishing Bloch vectors), got a = {:?}, b = {:?}",
            state.a(),
            state.b()
        )))
    }
}

/// `s₁(T)s₁(W) + s₂(T)s₂(W)` as a bare number.
pub fn s0_value(s: [f64; 2], q: &StrengthQuad, theta: f64, phi: f64) -> Result<f64> {
    let wb = w_bundle(q, theta, phi)?;
    Ok(s[0] * wb.s_w[0] + s[1] * wb.s_w[1])
}

pub fn s0_bound(state: &FanoState, q: &StrengthQuad, theta: f64, phi: f64) -> Result<BoundReport> {
    let value = s0_value(top_singular_values(&state.t()), q, theta, phi)?;
    Ok(BoundReport::new(CriterionId::Thm1, value))
}

/// Relabelling of the strengths that turns the cosine terms of `I±²`
/// nonnegative; `S₀` of the result is the relabelling-invariant bound.
pub fn tilde_strengths(q: &StrengthQuad, theta: f64, phi: f64) -> StrengthQuad {
    let mut r = *q;
    if (q.sy * q.sy - q.syp * q.syp) * theta.cos() < 0.0 {
        r = r.swap_y();
    }
    if (q.sx * q.sx - q.sxp * q.sxp) * phi.cos() < 0.0 {
        r = r.swap_x();
    }
    r
}

/// `Ĩ±²` with absolute values on the strength differences and cosines.
pub fn i_tilde_squared(q: &StrengthQuad, theta: f64, phi: f64) -> (f64, f64) {
    let StrengthQuad { sx, sxp, sy, syp } = *q;
    let base = (sx * sx + sxp * sxp) * (sy * sy + syp * syp)
        + 2.0 * sx * sxp * (sy * sy - syp * syp).abs() * theta.cos().abs()
        + 2.0 * sy * syp * (sx * sx - sxp * sxp).abs() * phi.cos().abs();
    let cross = 4.0 * sx * sxp * sy * syp * theta.sin() * phi.sin();
    (base + cross, base - cross)
}

pub fn s0_tilde(state: &FanoState, q: &StrengthQuad, theta: f64, phi: f64) -> Result<BoundReport> {
    let value = s0_value(
        top_singular_values(&state.t()),
        &tilde_strengths(q, theta, phi),
        theta,
        phi,
    )?;
    Ok(BoundReport::new(CriterionId::Cor3, value))
}

/// Largest bias contribution `J` for extremal biases `|B| = 1 − S`.
pub fn j_max(q: &StrengthQuad) -> f64 {
    let StrengthQuad { sx, sxp, sy, syp } = *q;
    (2.0 - sx - sxp) * (2.0 - sy - syp) - 2.0 * (1.0 - sx.max(sxp)) * (1.0 - sy.max(syp))
}

pub fn st_bound(state: &FanoState, q: &StrengthQuad, theta: f64, phi: f64) -> Result<BoundReport> {
    require_t_state(state)?;
    Ok(s0_bound(state, q, theta, phi)?.shifted(CriterionId::Thm2, j_max(q)))
}

pub fn st_tilde(state: &FanoState, q: &StrengthQuad, theta: f64, phi: f64) -> Result<BoundReport> {
    require_t_state(state)?;
    Ok(s0_tilde(state, q, theta, phi)?.shifted(CriterionId::Cor6, j_max(q)))
}

/// `Σⱼ sⱼ(Θ) sⱼ(N)` over all four singular values; a necessary condition
/// valid for any state and any observables.
pub fn sgen_bound(scenario: &Scenario, state: &FanoState) -> Result<BoundReport> {
    let st = state.theta_matrix().singular_values()?;
    let sn = chsh_n_matrix(scenario).singular_values()?;
    let value = st.iter().zip(&sn).map(|(a, b)| a * b).sum();
    Ok(BoundReport::new(CriterionId::Sgen, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chsh::chsh;
    use crate::model::{
        random_observable_with, random_state_with, rng_from_seed, singlet, werner, StateKind,
    };
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    fn tstate_with(s: [f64; 2]) -> FanoState {
        crate::model::with_top_singular_values(s[0], s[1]).unwrap()
    }

    #[test]
    fn horodecki_examples() {
        assert!((horodecki(&singlet().t()) - 2.0 * SQRT_2).abs() < 1e-14);
        assert!((horodecki(&werner(0.5).unwrap().t()) - SQRT_2).abs() < 1e-14);
        assert_eq!(horodecki(&Mat3::zeros()), 0.0);
    }

    #[test]
    fn s0_examples() {
        let q1 = StrengthQuad::uniform(1.0).unwrap();
        let r = s0_bound(&singlet(), &q1, FRAC_PI_2, FRAC_PI_2).unwrap();
        assert!((r.value - 2.0 * SQRT_2).abs() < 1e-14 && r.violated);
        for s in [0.3, 0.7, 0.9] {
            let q = StrengthQuad::uniform(s).unwrap();
            let v = s0_bound(&singlet(), &q, FRAC_PI_2, FRAC_PI_2).unwrap().value;
            assert!((v - 2.0 * s * s * SQRT_2).abs() < 1e-14);
        }
        let q0 = StrengthQuad::uniform(0.0).unwrap();
        assert_eq!(s0_bound(&singlet(), &q0, 1.0, 1.0).unwrap().value, 0.0);
    }

    /// At fixed angles a stronger observable can lower the bound: with
    /// `θ = 0` and `cos φ < 0` the `Y′` term partly cancels the `Y` term.
    #[test]
    fn fixed_angle_s0_is_not_monotone() {
        let s = [0.72, 0.0];
        let weak = StrengthQuad::new(0.98, 0.0, 0.98, 0.0).unwrap();
        let strong = StrengthQuad::new(0.98, 0.0, 0.98, 0.5).unwrap();
        let a = s0_value(s, &weak, 0.0, 2.35).unwrap();
        let b = s0_value(s, &strong, 0.0, 2.35).unwrap();
        assert!(b < a - 0.01, "{b} vs {a}");
    }

    #[test]
    fn violated_is_strict() {
        assert!(!BoundReport::new(CriterionId::Thm1, 2.0).violated);
        assert!(BoundReport::new(CriterionId::Thm1, 2.0 + 1e-15).violated);
    }

    #[test]
    fn tilde_example() {
        let q = StrengthQuad::new(1.0, 0.5, 1.0, 0.5).unwrap();
        let (th, ph) = (2.0 * PI / 3.0, FRAC_PI_2);
        let plain = s0_bound(&singlet(), &q, th, ph).unwrap().value;
        let tilde = s0_tilde(&singlet(), &q, th, ph).unwrap().value;
        assert!(tilde > plain + 1e-3, "{tilde} vs {plain}");
        let (p2, m2) = i_tilde_squared(&q, th, ph);
        let literal = 0.5 * (p2.sqrt() + m2.max(0.0).sqrt()) + 0.5 * (p2.sqrt() - m2.max(0.0).sqrt());
        assert!((tilde - literal).abs() < 1e-10);
    }

    #[test]
    fn j_max_examples() {
        assert_eq!(j_max(&StrengthQuad::uniform(1.0).unwrap()), 0.0);
        assert_eq!(j_max(&StrengthQuad::uniform(0.0).unwrap()), 2.0);
        assert!((j_max(&StrengthQuad::new(1.0, 0.5, 1.0, 0.5).unwrap()) - 0.25).abs() < 1e-15);
    }

    /// Exhaustive maximum of `J` over the sixteen extremal sign patterns.
    fn j_brute(q: &StrengthQuad) -> f64 {
        let bar = q.as_array().map(|s| 1.0 - s);
        (0..16u32)
            .map(|m| {
                let b: [f64; 4] =
                    std::array::from_fn(|i| if m >> i & 1 == 1 { -bar[i] } else { bar[i] });
                crate::chsh::bias_term(b)
            })
            .fold(f64::MIN, f64::max)
    }

    #[test]
    fn st_examples() {
        for s in [0.5, 0.835, 0.95] {
            let q = StrengthQuad::uniform(s).unwrap();
            let v = st_bound(&singlet(), &q, FRAC_PI_2, FRAC_PI_2).unwrap().value;
            assert!((v - (2.0 * s * s * SQRT_2 + 2.0 * (1.0 - s).powi(2))).abs() < 1e-14);
        }
        let q = StrengthQuad::uniform(0.835).unwrap();
        let biased = st_bound(&singlet(), &q, FRAC_PI_2, FRAC_PI_2).unwrap();
        let unbiased = s0_bound(&singlet(), &q, FRAC_PI_2, FRAC_PI_2).unwrap();
        assert!((biased.value - 2.0265).abs() < 1e-4 && biased.violated);
        assert!((unbiased.value - 1.9721).abs() < 1e-4 && !unbiased.violated);

        let z = st_tilde(&singlet(), &StrengthQuad::uniform(0.0).unwrap(), 1.0, 1.0).unwrap();
        assert_eq!(z.value, 2.0);
        assert!(!z.violated);
    }

    #[test]
    fn st_requires_t_state() {
        let state = crate::model::product([0.0, 0.0, 0.5], [0.0, 0.0, 0.5]).unwrap();
        let q = StrengthQuad::uniform(0.5).unwrap();
        assert!(matches!(st_bound(&state, &q, 1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(st_tilde(&state, &q, 1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn sgen_upper_bounds_chsh() {
        let mut rng = rng_from_seed(31);
        for i in 0..1000 {
            let kind = [StateKind::General, StateKind::TwoQubitPure, StateKind::Tstate][i % 3];
            let state = random_state_with(&mut rng, kind);
            let mut o = || random_observable_with(&mut rng, None, false);
            let s = Scenario::new(o(), o(), o(), o());
            let b = sgen_bound(&s, &state).unwrap().value;
            assert!(b >= chsh(&s, &state).canonical - 1e-9);
        }
        let c = crate::model::Observable::coin(0.0).unwrap();
        let zero = Scenario::new(c, c, c, c);
        assert_eq!(sgen_bound(&zero, &singlet()).unwrap().value, 0.0);
    }

    #[test]
    fn criterion_ids_round_trip() {
        for c in CriterionId::ALL {
            assert_eq!(c.as_str().parse::<CriterionId>().unwrap(), c);
            let json = serde_json::to_string(&c).unwrap();
            assert_eq!(json, format!("\"{}\"", c.as_str()));
        }
        assert!("thm5".parse::<CriterionId>().is_err());
    }

    fn unit() -> impl Strategy<Value = f64> {
        0.0..=1.0f64
    }

    fn quad() -> impl Strategy<Value = StrengthQuad> {
        (unit(), unit(), unit(), unit()).prop_map(|(a, b, c, d)| StrengthQuad::new(a, b, c, d).unwrap())
    }

    /// Correlation singular values `s₁ ≥ s₂` of some physical state.
    fn singulars() -> impl Strategy<Value = [f64; 2]> {
        (unit(), unit()).prop_map(|(a, b)| [a.max(b), a.min(b)])
    }

    proptest! {
        #[test]
        fn singular_value_form_matches_i_pm_form(s in singulars(), q in quad(), th in 0.0..=PI, ph in 0.0..=PI) {
            let v = s0_value(s, &q, th, ph).unwrap();
            let wb = w_bundle(&q, th, ph).unwrap();
            let alt = 0.5 * (s[0] + s[1]) * wb.i_plus + 0.5 * (s[0] - s[1]) * wb.i_minus;
            prop_assert!((v - alt).abs() < 1e-10);
        }

        #[test]
        fn schwarz_chain(s in singulars(), q in quad(), th in 0.0..=PI, ph in 0.0..=PI) {
            let v = s0_value(s, &q, th, ph).unwrap();
            let w = w_matrix(&q, th, ph);
            let middle = w.frobenius_sq().sqrt() * s[0].hypot(s[1]);
            prop_assert!(v <= middle + 1e-10);
            prop_assert!(middle <= 2.0 * s[0].hypot(s[1]) + 1e-10);
        }

        #[test]
        fn optimal_s0_monotone_in_strengths(s in singulars(), q in quad(), k in 0usize..4,
                                            bump in 0.0..=1.0f64) {
            let mut a = q.as_array();
            a[k] += (1.0 - a[k]) * bump;
            let q2 = StrengthQuad::new(a[0], a[1], a[2], a[3]).unwrap();
            let state = tstate_with(s);
            let lo = optimal_bound(&state, &q, false).unwrap().value;
            let hi = optimal_bound(&state, &q2, false).unwrap().value;
            prop_assert!(hi >= lo - 1e-9, "{} < {}", hi, lo);
            prop_assert!(j_max(&q2) <= j_max(&q) + 1e-15);
        }

        #[test]
        fn j_max_matches_brute_force(q in quad()) {
            let j = j_max(&q);
            prop_assert!((j - j_brute(&q)).abs() < 1e-12);
            prop_assert!((-1e-15..=2.0 + 1e-15).contains(&j));
        }

        #[test]
        fn side_exchange_symmetry(s in singulars(), q in quad(), th in 0.0..=PI, ph in 0.0..=PI) {
            let a = s0_value(s, &q, th, ph).unwrap();
            let b = s0_value(s, &q.swap_sides(), ph, th).unwrap();
            prop_assert!((a - b).abs() < 1e-10);
        }

        #[test]
        fn tilde_properties(s in singulars(), q in quad(), th in 0.0..=PI, ph in 0.0..=PI) {
            let state = tstate_with(s);
            let tilde = s0_tilde(&state, &q, th, ph).unwrap().value;
            prop_assert!(tilde >= s0_bound(&state, &q, th, ph).unwrap().value - 1e-12);
            for r in [q.swap_x(), q.swap_y(), q.swap_x().swap_y()] {
                prop_assert!((s0_tilde(&state, &r, th, ph).unwrap().value - tilde).abs() < 1e-10);
            }
            // equals the best of the four relabelled canonical bounds
            let best = [q, q.swap_x(), q.swap_y(), q.swap_x().swap_y()]
                .iter()
                .map(|r| s0_value(s, r, th, ph).unwrap())
                .fold(f64::MIN, f64::max);
            prop_assert!((tilde - best).abs() < 1e-10);
            let (p2, m2) = i_tilde_squared(&q, th, ph);
            let literal = 0.5 * (s[0] + s[1]) * p2.sqrt() + 0.5 * (s[0] - s[1]) * m2.max(0.0).sqrt();
            prop_assert!((tilde - literal).abs() < 1e-7);
        }

        #[test]
        fn tilde_equals_plain_for_equal_sides(s in singulars(), sa in unit(), sb in unit(),
                                              th in 0.0..=PI, ph in 0.0..=PI) {
            let state = tstate_with(s);
            let q = StrengthQuad::per_side(sa, sb).unwrap();
            let a = s0_tilde(&state, &q, th, ph).unwrap().value;
            let b = s0_bound(&state, &q, th, ph).unwrap().value;
            prop_assert!((a - b).abs() < 1e-12);
            let c = st_tilde(&state, &q, th, ph).unwrap().value;
            let d = st_bound(&state, &q, th, ph).unwrap().value;
            prop_assert!((c - d).abs() < 1e-12);
        }

        #[test]
        fn s0_below_horodecki(s in singulars(), q in quad(), th in 0.0..=PI, ph in 0.0..=PI) {
            prop_assert!(s0_value(s, &q, th, ph).unwrap() <= 2.0 * s[0].hypot(s[1]) + 1e-10);
        }
    }
}
