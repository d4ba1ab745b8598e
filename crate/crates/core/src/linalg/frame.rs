use serde::Serialize;

use super::mat::{cross, dot, norm, outer, scaled, Mat3, Vec3};
use crate::error::{invalid, Result};

const FRAME_TOL: f64 = 1e-10;

/// Right-handed orthonormal triad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Frame3 {
    e: [Vec3; 3],
}

impl Frame3 {
    pub fn standard() -> Self {
        Frame3 {
            e: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// Validates orthonormality and handedness.
    pub fn new(e1: Vec3, e2: Vec3, e3: Vec3) -> Result<Self> {
        let e = [e1, e2, e3];
        for (i, v) in e.iter().enumerate() {
            if !v.iter().all(|x| x.is_finite()) || (norm(v) - 1.0).abs() > FRAME_TOL {
                return Err(invalid(format!("frame vector e{} is not unit: {v:?}", i + 1)));
            }
        }
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            if dot(&e[i], &e[j]).abs() > FRAME_TOL {
                return Err(invalid(format!(
                    "frame vectors e{} and e{} are not orthogonal",
                    i + 1,
                    j + 1
                )));
            }
        }
        let c = cross(&e1, &e2);
        if c.iter().zip(&e3).any(|(a, b)| (a - b).abs() > FRAME_TOL) {
            return Err(invalid("frame is not right-handed (e3 != e1 x e2)"));
        }
        Ok(Frame3 { e })
    }

    /// Frame whose vectors are the columns of a proper rotation.
    pub fn from_rotation(r: &Mat3) -> Result<Self> {
        Self::new(r.col(0), r.col(1), r.col(2))
    }

    pub fn e(&self, k: usize) -> Vec3 {
        self.e[k]
    }

    pub fn vectors(&self) -> [Vec3; 3] {
        self.e
    }

    /// Matrix with the frame vectors as columns.
    pub fn as_matrix(&self) -> Mat3 {
        Mat3::from_cols(self.e)
    }
}

/// Proper rotation `R` with `R·src.e_k = dst.e_k` for every `k`.
pub fn rotation_between(src: &Frame3, dst: &Frame3) -> Result<Mat3> {
    let r = (0..3).fold(Mat3::zeros(), |acc, k| acc + outer(&dst.e[k], &src.e[k]));
    let det = r.det();
    if (det - 1.0).abs() > FRAME_TOL || r.orthogonality_defect() > FRAME_TOL {
        return Err(invalid(format!("degenerate frame pair (det = {det})")));
    }
    Ok(r)
}

/// Completes `e1` to a right-handed frame.
///
/// With a usable `hint`, `e2` is the normalised component of the hint
/// orthogonal to `e1`. Otherwise the standard basis vector with the smallest
/// `|component|` along `e1` is orthogonalised instead.
pub fn complete_frame(e1: &Vec3, hint: Option<&Vec3>) -> Result<Frame3> {
    let n = norm(e1);
    if n == 0.0 || !n.is_finite() {
        return Err(invalid("cannot complete a frame from a zero vector"));
    }
    if (n - 1.0).abs() > FRAME_TOL {
        return Err(invalid(format!("e1 is not a unit vector (|e1| = {n})")));
    }
    let e1 = scaled(e1, 1.0 / n);
    let residual = |v: &Vec3| {
        let p = dot(v, &e1);
        [v[0] - p * e1[0], v[1] - p * e1[1], v[2] - p * e1[2]]
    };

    let from_hint = hint.and_then(|h| {
        let r = residual(h);
        let rn = norm(&r);
        (rn > 1e-8 * norm(h).max(1e-300)).then(|| scaled(&r, 1.0 / rn))
    });
    let e2 = match from_hint {
        Some(v) => v,
        None => {
            let k = (0..3)
                .min_by(|&i, &j| e1[i].abs().total_cmp(&e1[j].abs()))
                .unwrap_or(0);
            let mut basis = [0.0; 3];
            basis[k] = 1.0;
            let r = residual(&basis);
            scaled(&r, 1.0 / norm(&r))
        }
    };
    let e3 = cross(&e1, &e2);
    Frame3::new(e1, e2, e3)
}
