//! Seeded samplers for states, observables and rotations.
//!
//! Every sampler takes an explicit generator; the `*_seed` style helpers
//! build a fresh [`ChaCha8Rng`] so results are reproducible across platforms.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{FanoState, Observable, StrengthQuad};
use crate::linalg::{CMat4, Mat3, Vec3};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 mix of `(seed, index)`, used to give each trial or restart an
/// independent stream.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    /// Uniform point of the Bell tetrahedron, then independent local rotations.
    Tstate,
    /// Ginibre-induced mixed state.
    General,
    /// Haar-random pure state.
    TwoQubitPure,
    /// T-state with `s₁(T) = s₂(T)`.
    EqualSingular,
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Uniformly distributed unit vector.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let v = [gaussian(rng), gaussian(rng), gaussian(rng)];
        let n = crate::linalg::norm(&v);
        if n > 1e-8 {
            return v.map(|x| x / n);
        }
    }
}

/// Haar-random proper rotation, via a uniformly random unit quaternion.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Mat3 {
    let q = loop {
        let q = [gaussian(rng), gaussian(rng), gaussian(rng), gaussian(rng)];
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            break q.map(|x| x / n);
        }
    };
    let [w, x, y, z] = q;
    Mat3::from_rows([
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w)],
        [2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w)],
        [2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y)],
    ])
}

const TETRAHEDRON: [[f64; 3]; 4] = [
    [-1.0, -1.0, -1.0],
    [-1.0, 1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, -1.0],
];

fn tetrahedron_point<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    // flat Dirichlet weights give the uniform measure on a simplex
    let w: [f64; 4] = std::array::from_fn(|_| -(1.0 - rng.random::<f64>()).ln());
    let total: f64 = w.iter().sum();
    let mut p = [0.0; 3];
    for (wk, v) in w.iter().zip(TETRAHEDRON) {
        for i in 0..3 {
            p[i] += wk / total * v[i];
        }
    }
    p
}

fn rotated_t_state<R: Rng + ?Sized>(rng: &mut R, diag: [f64; 3]) -> FanoState {
    let o1 = random_rotation(rng);
    let o2 = random_rotation(rng);
    let t = o1 * Mat3::from_diag(diag) * o2.transpose();
    FanoState::t_state(t).expect("rotated tetrahedron point is physical")
}

fn ginibre_matrix<R: Rng + ?Sized>(rng: &mut R) -> CMat4 {
    std::array::from_fn(|_| std::array::from_fn(|_| Complex64::new(gaussian(rng), gaussian(rng))))
}

/// Samples a state of the requested kind.
pub fn random_state_with<R: Rng + ?Sized>(rng: &mut R, kind: StateKind) -> FanoState {
    match kind {
        StateKind::Tstate => {
            let p = tetrahedron_point(rng);
            rotated_t_state(rng, p)
        }
        StateKind::EqualSingular => loop {
            // the tetrahedron is symmetric under t₁ ↔ t₂, so the midpoint stays inside
            let [t1, t2, t3] = tetrahedron_point(rng);
            let t = 0.5 * (t1 + t2);
            if t3.abs() <= t.abs() {
                break rotated_t_state(rng, [t, t, t3]);
            }
        },
        StateKind::General => {
            let g = ginibre_matrix(rng);
            let mut rho = [[Complex64::new(0.0, 0.0); 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    rho[i][j] = (0..4).map(|k| g[i][k] * g[j][k].conj()).sum();
                }
            }
            FanoState::from_density(&rho).expect("G G† is positive")
        }
        StateKind::TwoQubitPure => {
            let psi: [Complex64; 4] =
                std::array::from_fn(|_| Complex64::new(gaussian(rng), gaussian(rng)));
            let mut rho = [[Complex64::new(0.0, 0.0); 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    rho[i][j] = psi[i] * psi[j].conj();
                }
            }
            FanoState::from_density(&rho).expect("projector is positive")
        }
    }
}

pub fn random_state(seed: u64, kind: StateKind) -> FanoState {
    random_state_with(&mut rng_from_seed(seed), kind)
}

/// Observable with a uniformly random direction. The strength is uniform in
/// `[0, 1]` unless fixed; the bias is zero when `unbiased`, otherwise uniform
/// in `[−(1−S), 1−S]`.
pub fn random_observable_with<R: Rng + ?Sized>(
    rng: &mut R,
    fixed_strength: Option<f64>,
    unbiased: bool,
) -> Observable {
    let strength = fixed_strength.unwrap_or_else(|| rng.random::<f64>());
    let direction = random_unit_vector(rng);
    let extent = 1.0 - strength;
    let bias = if unbiased || extent <= 0.0 {
        0.0
    } else {
        rng.random_range(-extent..=extent)
    };
    Observable::new(bias, strength, direction).expect("sampled within constraints")
}

pub fn random_observable(seed: u64, fixed_strength: Option<f64>, unbiased: bool) -> Observable {
    random_observable_with(&mut rng_from_seed(seed), fixed_strength, unbiased)
}

pub fn random_strengths<R: Rng + ?Sized>(rng: &mut R) -> StrengthQuad {
    StrengthQuad::new(rng.random(), rng.random(), rng.random(), rng.random())
        .expect("uniform samples lie in [0, 1)")
}
