//! Singular value decomposition for the small fixed sizes used throughout
//! the crate: closed form for 2×2, one-sided (Hestenes) Jacobi for 3×3 and
//! 4×4.

use super::mat::{dot, Mat, Mat2, Mat3, Mat4};
use crate::error::{invalid, Result};

/// Off-diagonal Gram entries below this (relative to the column norms) count
/// as converged.
const JACOBI_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 60;

/// `m = u · diag(s) · vᵀ` with `s` descending and non-negative.
///
/// The orthogonal factors are not normalised to `det = +1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvdFactors<const N: usize> {
    pub u: Mat<N>,
    pub s: [f64; N],
    pub v: Mat<N>,
}

impl<const N: usize> SvdFactors<N> {
    pub fn reconstruct(&self) -> Mat<N> {
        self.u * Mat::from_diag(self.s) * self.v.transpose()
    }
}

pub trait Svd<const N: usize> {
    fn svd(&self) -> Result<SvdFactors<N>>;

    fn singular_values(&self) -> Result<[f64; N]> {
        Ok(self.svd()?.s)
    }
}

impl Svd<2> for Mat2 {
    fn svd(&self) -> Result<SvdFactors<2>> {
        check_finite(self)?;
        Ok(svd_2x2(self))
    }
}

impl Svd<3> for Mat3 {
    fn svd(&self) -> Result<SvdFactors<3>> {
        check_finite(self)?;
        Ok(svd_jacobi(self))
    }
}

impl Svd<4> for Mat4 {
    fn svd(&self) -> Result<SvdFactors<4>> {
        check_finite(self)?;
        Ok(svd_jacobi(self))
    }
}

fn check_finite<const N: usize>(m: &Mat<N>) -> Result<()> {
    if m.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("matrix has non-finite entries: {m:?}")))
    }
}

fn rot2(angle: f64) -> Mat2 {
    let (s, c) = angle.sin_cos();
    Mat([[c, -s], [s, c]])
}

/// Closed form: `m = R(φ) · diag(q + r, q − r) · R(θ)`.
fn svd_2x2(m: &Mat2) -> SvdFactors<2> {
    let [[a, b], [c, d]] = m.0;
    let e = 0.5 * (a + d);
    let f = 0.5 * (a - d);
    let g = 0.5 * (c + b);
    let h = 0.5 * (c - b);
    let q = e.hypot(h);
    let r = f.hypot(g);
    let a1 = g.atan2(f);
    let a2 = h.atan2(e);
    let theta = 0.5 * (a2 - a1);
    let phi = 0.5 * (a2 + a1);

    let u = rot2(phi);
    let mut v = rot2(theta).transpose();
    let mut s2 = q - r;
    if s2 < 0.0 {
        s2 = -s2;
        v.0[0][1] = -v.0[0][1];
        v.0[1][1] = -v.0[1][1];
    }
    SvdFactors {
        u,
        s: [q + r, s2],
        v,
    }
}

fn svd_jacobi<const N: usize>(m: &Mat<N>) -> SvdFactors<N> {
    let mut a = *m;
    let mut v = Mat::<N>::identity();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..N {
            for q in p + 1..N {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..N {
                    alpha += a.0[i][p] * a.0[i][p];
                    beta += a.0[i][q] * a.0[i][q];
                    gamma += a.0[i][p] * a.0[i][q];
                }
                if gamma == 0.0 || gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..N {
                    let (ap, aq) = (a.0[i][p], a.0[i][q]);
                    a.0[i][p] = c * ap - s * aq;
                    a.0[i][q] = s * ap + c * aq;
                    let (vp, vq) = (v.0[i][p], v.0[i][q]);
                    v.0[i][p] = c * vp - s * vq;
                    v.0[i][q] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..N).map(|j| dot(&a.col(j), &a.col(j)).sqrt()).collect();
    let mut order: Vec<usize> = (0..N).collect();
    // stable: ties keep the prior column order
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let s_max = norms[order[0]];

    let mut s = [0.0; N];
    let mut u_cols = [[0.0; N]; N];
    let mut v_cols = [[0.0; N]; N];
    let mut pending = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        s[k] = norms[j];
        v_cols[k] = v.col(j);
        let col = a.col(j);
        if norms[j] > 0.0 && norms[j] > s_max * 1e-8 {
            u_cols[k] = col.map(|x| x / norms[j]);
        } else {
            pending.push((k, col, norms[j]));
        }
    }
    // Tiny or zero columns: orthogonalise against what is already fixed, and
    // fall back to the standard basis when nothing usable is left.
    for (k, col, nrm) in pending {
        let fixed: Vec<usize> = (0..k).collect();
        let mut candidate = if nrm > 0.0 {
            orthogonalize(&col.map(|x| x / nrm), &u_cols, &fixed)
        } else {
            None
        };
        if candidate.is_none() {
            candidate = (0..N)
                .filter_map(|e| {
                    let mut basis = [0.0; N];
                    basis[e] = 1.0;
                    orthogonalize(&basis, &u_cols, &fixed)
                })
                .next();
        }
        u_cols[k] = candidate.expect("standard basis spans the space");
    }

    SvdFactors {
        u: Mat::from_cols(u_cols),
        s,
        v: Mat::from_cols(v_cols),
    }
}

/// Modified Gram-Schmidt of `x` against `cols[fixed]`, twice for stability.
/// Returns `None` when the residual is too small to normalise reliably.
fn orthogonalize<const N: usize>(
    x: &[f64; N],
    cols: &[[f64; N]; N],
    fixed: &[usize],
) -> Option<[f64; N]> {
    let mut r = *x;
    for _ in 0..2 {
        for &j in fixed {
            let p = dot(&r, &cols[j]);
            for i in 0..N {
                r[i] -= p * cols[j][i];
            }
        }
    }
    let n = dot(&r, &r).sqrt();
    (n > 0.25).then(|| r.map(|x| x / n))
}
