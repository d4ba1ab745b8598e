//! Two-valued qubit observables, two-qubit states in Fano form, and the
//! measurement scenarios built from them.

mod random;
mod states;

pub use random::{
    derive_seed, random_observable, random_observable_with, random_rotation, random_state,
    random_state_with, random_strengths, random_unit_vector, rng_from_seed, StateKind,
};
pub use states::{bell_diagonal, product, singlet, werner, with_top_singular_values};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    angle_between, hermitian_eigenvalues_4, norm, scaled, CMat4, Mat3, Mat4, Svd, Vec3,
};

/// Slack on `S + |B| <= 1`.
pub const CONSTRAINT_TOL: f64 = 1e-12;
/// Directions further than this from unit norm are rejected rather than
/// renormalised.
pub const DIRECTION_TOL: f64 = 1e-6;
/// Smallest eigenvalue accepted for a reconstructed density matrix.
pub const PHYSICALITY_TOL: f64 = -1e-10;
/// Bloch vectors below this norm make a state a T-state.
pub const TSTATE_TOL: f64 = 1e-10;

/// A two-valued qubit observable `X = B·1 + S σ·x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawObservable")]
pub struct Observable {
    bias: f64,
    strength: f64,
    direction: Vec3,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObservable {
    bias: f64,
    strength: f64,
    direction: Vec3,
}

impl TryFrom<RawObservable> for Observable {
    type Error = Error;
    fn try_from(r: RawObservable) -> Result<Self> {
        Observable::new(r.bias, r.strength, r.direction)
    }
}

impl Observable {
    pub fn new(bias: f64, strength: f64, direction: Vec3) -> Result<Self> {
        if !bias.is_finite() || !strength.is_finite() {
            return Err(invalid("bias and strength must be finite"));
        }
        if !(0.0..=1.0).contains(&strength) {
            return Err(Error::Constraint(format!("strength {strength} outside [0, 1]")));
        }
        if bias.abs() > 1.0 {
            return Err(Error::Constraint(format!("bias {bias} outside [-1, 1]")));
        }
        if strength + bias.abs() > 1.0 + CONSTRAINT_TOL {
            return Err(Error::Constraint(format!(
                "strength + |bias| = {} exceeds 1",
                strength + bias.abs()
            )));
        }
        let n = norm(&direction);
        if !n.is_finite() || (n - 1.0).abs() > DIRECTION_TOL {
            return Err(invalid(format!(
                "direction {direction:?} is not a unit vector (norm {n})"
            )));
        }
        Ok(Observable {
            bias,
            strength,
            direction: scaled(&direction, 1.0 / n),
        })
    }

    /// Unbiased observable of the given strength.
    pub fn unbiased(strength: f64, direction: Vec3) -> Result<Self> {
        Self::new(0.0, strength, direction)
    }

    /// Spin measurement `σ·x`.
    pub fn projective(direction: Vec3) -> Result<Self> {
        Self::new(0.0, 1.0, direction)
    }

    /// Zero-strength observable: a coin with outcome probabilities `(1 ± B)/2`.
    pub fn coin(bias: f64) -> Result<Self> {
        Self::new(bias, 0.0, [0.0, 0.0, 1.0])
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn direction(&self) -> Vec3 {
        self.direction
    }

    /// Largest admissible `|bias|` at this strength, `1 - S`.
    pub fn bias_extent(&self) -> f64 {
        1.0 - self.strength
    }

    /// `(B, S x)`: the 4-vector this observable contributes to `⟨XY⟩ = u_Xᵀ Θ u_Y`.
    pub fn fano_vector(&self) -> [f64; 4] {
        let s = self.strength;
        let [x, y, z] = self.direction;
        [self.bias, s * x, s * y, s * z]
    }

    /// Outcome probabilities `(p₊, p₋)` on a qubit with Bloch vector `r`.
    pub fn outcome_probabilities(&self, r: &Vec3) -> (f64, f64) {
        let m = self.bias + self.strength * crate::linalg::dot(&self.direction, r);
        (0.5 * (1.0 + m), 0.5 * (1.0 - m))
    }

    pub fn with_bias(&self, bias: f64) -> Result<Self> {
        Self::new(bias, self.strength, self.direction)
    }

    pub fn with_direction(&self, direction: Vec3) -> Result<Self> {
        Self::new(self.bias, self.strength, direction)
    }

    /// Operator `B·1 + S σ·x` as a 2×2 complex matrix.
    pub fn operator(&self) -> [[Complex64; 2]; 2] {
        let mut op = [[Complex64::new(0.0, 0.0); 2]; 2];
        let u = self.fano_vector();
        for (mu, p) in PAULI.iter().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    op[i][j] += p[i][j] * u[mu];
                }
            }
        }
        op
    }
}

const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `σ₀ = 1, σ₁, σ₂, σ₃`.
pub const PAULI: [[[Complex64; 2]; 2]; 4] = [
    [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]],
    [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
    [[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]],
    [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]],
];

/// Kronecker product of two 2×2 complex matrices.
pub fn kron2(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> CMat4 {
    let mut out = [[c(0.0, 0.0); 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// Two-qubit state `ρ = ¼ Σ Θ_{μν} σ_μ⊗σ_ν` with `Θ = [[1, bᵀ], [a, T]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFanoState")]
pub struct FanoState {
    a: Vec3,
    b: Vec3,
    t: Mat3,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFanoState {
    a: Vec3,
    b: Vec3,
    t: Mat3,
}

impl TryFrom<RawFanoState> for FanoState {
    type Error = Error;
    fn try_from(r: RawFanoState) -> Result<Self> {
        FanoState::new(r.a, r.b, r.t)
    }
}

impl FanoState {
    /// Validates the Fano components and physicality of the reconstructed
    /// density matrix.
    pub fn new(a: Vec3, b: Vec3, t: Mat3) -> Result<Self> {
        if !a.iter().chain(&b).all(|x| x.is_finite()) || !t.is_finite() {
            return Err(invalid("state components must be finite"));
        }
        let bound = 1.0 + CONSTRAINT_TOL;
        if norm(&a) > bound || norm(&b) > bound {
            return Err(Error::Unphysical(format!(
                "Bloch vector longer than 1 (|a| = {}, |b| = {})",
                norm(&a),
                norm(&b)
            )));
        }
        if t.max_abs() > bound {
            return Err(Error::Unphysical(format!(
                "correlation entry exceeds 1 in magnitude ({})",
                t.max_abs()
            )));
        }
        let state = FanoState { a, b, t };
        let ev = state.eigenvalues()?;
        if ev[3] < PHYSICALITY_TOL {
            return Err(Error::Unphysical(format!(
                "density matrix has negative eigenvalue {:.3e} (spectrum {ev:?})",
                ev[3]
            )));
        }
        Ok(state)
    }

    /// State with maximally mixed marginals.
    pub fn t_state(t: Mat3) -> Result<Self> {
        Self::new([0.0; 3], [0.0; 3], t)
    }

    /// Extracts Fano components from a density matrix.
    pub fn from_density(rho: &CMat4) -> Result<Self> {
        let expect = |mu: usize, nu: usize| -> f64 {
            let op = kron2(&PAULI[mu], &PAULI[nu]);
            let mut tr = c(0.0, 0.0);
            for i in 0..4 {
                for j in 0..4 {
                    tr += rho[i][j] * op[j][i];
                }
            }
            tr.re
        };
        let norm0 = expect(0, 0);
        if !(norm0 > 0.0) {
            return Err(invalid("density matrix has non-positive trace"));
        }
        let mut a = [0.0; 3];
        let mut b = [0.0; 3];
        let mut t = Mat3::zeros();
        for i in 0..3 {
            a[i] = expect(i + 1, 0) / norm0;
            b[i] = expect(0, i + 1) / norm0;
            for j in 0..3 {
                t[(i, j)] = expect(i + 1, j + 1) / norm0;
            }
        }
        Self::new(a, b, t)
    }

    pub fn a(&self) -> Vec3 {
        self.a
    }

    pub fn b(&self) -> Vec3 {
        self.b
    }

    pub fn t(&self) -> Mat3 {
        self.t
    }

    pub fn is_t_state(&self) -> bool {
        norm(&self.a) < TSTATE_TOL && norm(&self.b) < TSTATE_TOL
    }

    /// The 4×4 matrix `Θ = [[1, bᵀ], [a, T]]`.
    pub fn theta_matrix(&self) -> Mat4 {
        let mut m = Mat4::zeros();
        m[(0, 0)] = 1.0;
        for i in 0..3 {
            m[(0, i + 1)] = self.b[i];
            m[(i + 1, 0)] = self.a[i];
            for j in 0..3 {
                m[(i + 1, j + 1)] = self.t[(i, j)];
            }
        }
        m
    }

    pub fn density_matrix(&self) -> CMat4 {
        let theta = self.theta_matrix();
        let mut rho = [[c(0.0, 0.0); 4]; 4];
        for mu in 0..4 {
            for nu in 0..4 {
                let w = theta[(mu, nu)];
                if w == 0.0 {
                    continue;
                }
                let op = kron2(&PAULI[mu], &PAULI[nu]);
                for i in 0..4 {
                    for j in 0..4 {
                        rho[i][j] += op[i][j] * (0.25 * w);
                    }
                }
            }
        }
        rho
    }

    /// Spectrum of the density matrix, descending.
    pub fn eigenvalues(&self) -> Result<[f64; 4]> {
        hermitian_eigenvalues_4(&self.density_matrix())
    }

    /// Singular values `s₁ ≥ s₂ ≥ s₃` of the correlation matrix.
    pub fn correlation_singular_values(&self) -> [f64; 3] {
        self.t
            .singular_values()
            .expect("validated state has finite entries")
    }

    /// `√(s₁² + s₂²)`.
    pub fn radius_r(&self) -> f64 {
        let [s1, s2, _] = self.correlation_singular_values();
        s1.hypot(s2)
    }
}

/// Free function form of [`FanoState::new`].
pub fn state_from_fano(a: Vec3, b: Vec3, t: Mat3) -> Result<FanoState> {
    FanoState::new(a, b, t)
}

/// The four observables `X, X′` (side A) and `Y, Y′` (side B).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub x: Observable,
    pub xp: Observable,
    pub y: Observable,
    pub yp: Observable,
}

impl Scenario {
    pub fn new(x: Observable, xp: Observable, y: Observable, yp: Observable) -> Self {
        Scenario { x, xp, y, yp }
    }

    /// Angle between the directions of `X` and `X′`, in `[0, π]`.
    pub fn theta(&self) -> f64 {
        angle_between(&self.x.direction, &self.xp.direction)
    }

    /// Angle between the directions of `Y` and `Y′`, in `[0, π]`.
    pub fn phi(&self) -> f64 {
        angle_between(&self.y.direction, &self.yp.direction)
    }

    pub fn strengths(&self) -> StrengthQuad {
        StrengthQuad {
            sx: self.x.strength,
            sxp: self.xp.strength,
            sy: self.y.strength,
            syp: self.yp.strength,
        }
    }

    /// `[B_X, B_X′, B_Y, B_Y′]`
    pub fn biases(&self) -> [f64; 4] {
        [self.x.bias, self.xp.bias, self.y.bias, self.yp.bias]
    }

    pub fn is_unbiased(&self) -> bool {
        self.biases().iter().all(|b| *b == 0.0)
    }

    /// Same directions and strengths with the given biases.
    pub fn with_biases(&self, biases: [f64; 4]) -> Result<Self> {
        Ok(Scenario {
            x: self.x.with_bias(biases[0])?,
            xp: self.xp.with_bias(biases[1])?,
            y: self.y.with_bias(biases[2])?,
            yp: self.yp.with_bias(biases[3])?,
        })
    }

    /// Assembles observables from strengths, biases and directions
    /// `[x, x′, y, y′]`.
    pub fn from_parts(q: &StrengthQuad, biases: [f64; 4], dirs: [Vec3; 4]) -> Result<Self> {
        let s = q.as_array();
        Ok(Scenario {
            x: Observable::new(biases[0], s[0], dirs[0])?,
            xp: Observable::new(biases[1], s[1], dirs[1])?,
            y: Observable::new(biases[2], s[2], dirs[2])?,
            yp: Observable::new(biases[3], s[3], dirs[3])?,
        })
    }

    /// Relabelings `X ↔ X′` and/or `Y ↔ Y′`.
    pub fn relabeled(&self, swap_x: bool, swap_y: bool) -> Self {
        let (x, xp) = if swap_x { (self.xp, self.x) } else { (self.x, self.xp) };
        let (y, yp) = if swap_y { (self.yp, self.y) } else { (self.y, self.yp) };
        Scenario { x, xp, y, yp }
    }
}

/// Strengths `(S_X, S_X′, S_Y, S_Y′)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct StrengthQuad {
    pub sx: f64,
    pub sxp: f64,
    pub sy: f64,
    pub syp: f64,
}

impl TryFrom<[f64; 4]> for StrengthQuad {
    type Error = Error;
    fn try_from(s: [f64; 4]) -> Result<Self> {
        StrengthQuad::new(s[0], s[1], s[2], s[3])
    }
}

impl From<StrengthQuad> for [f64; 4] {
    fn from(q: StrengthQuad) -> Self {
        q.as_array()
    }
}

impl StrengthQuad {
    pub fn new(sx: f64, sxp: f64, sy: f64, syp: f64) -> Result<Self> {
        let q = StrengthQuad { sx, sxp, sy, syp };
        if q.as_array().iter().any(|s| !(0.0..=1.0).contains(s)) {
            return Err(invalid(format!("strengths must lie in [0, 1]: {:?}", q.as_array())));
        }
        Ok(q)
    }

    pub fn uniform(s: f64) -> Result<Self> {
        Self::new(s, s, s, s)
    }

    /// Equal strengths on each side: `S_X = S_X′ = sa`, `S_Y = S_Y′ = sb`.
    pub fn per_side(sa: f64, sb: f64) -> Result<Self> {
        Self::new(sa, sa, sb, sb)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.sx, self.sxp, self.sy, self.syp]
    }

    /// `X ↔ X′`
    pub fn swap_x(&self) -> Self {
        StrengthQuad { sx: self.sxp, sxp: self.sx, ..*self }
    }

    /// `Y ↔ Y′`
    pub fn swap_y(&self) -> Self {
        StrengthQuad { sy: self.syp, syp: self.sy, ..*self }
    }

    /// Exchanges the roles of the two observers.
    pub fn swap_sides(&self) -> Self {
        StrengthQuad {
            sx: self.sy,
            sxp: self.syp,
            sy: self.sx,
            syp: self.sxp,
        }
    }
}
