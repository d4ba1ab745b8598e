use num_complex::Complex64;

use super::mat::Mat;
use crate::error::{invalid, Result};

pub type CMat4 = [[Complex64; 4]; 4];

const HERMITIAN_TOL: f64 = 1e-12;

/// Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order and the matching eigenvectors as
/// columns.
pub fn symmetric_eigen<const N: usize>(m: &Mat<N>) -> ([f64; N], Mat<N>) {
    let mut a = *m;
    let mut v = Mat::<N>::identity();
    for _ in 0..100 {
        let off: f64 = (0..N)
            .flat_map(|i| (0..N).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.0[i][j] * a.0[i][j])
            .sum();
        let scale: f64 = a.frobenius_sq();
        if off <= 1e-32 * scale || off == 0.0 {
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                let apq = a.0[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.0[q][q] - a.0[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..N {
                    let (akp, akq) = (a.0[k][p], a.0[k][q]);
                    a.0[k][p] = c * akp - s * akq;
                    a.0[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let (apk, aqk) = (a.0[p][k], a.0[q][k]);
                    a.0[p][k] = c * apk - s * aqk;
                    a.0[q][k] = s * apk + c * aqk;
                }
                for k in 0..N {
                    let (vkp, vkq) = (v.0[k][p], v.0[k][q]);
                    v.0[k][p] = c * vkp - s * vkq;
                    v.0[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..N).collect();
    order.sort_by(|&i, &j| a.0[j][j].total_cmp(&a.0[i][i]));
    let mut vals = [0.0; N];
    let mut cols = [[0.0; N]; N];
    for (k, &j) in order.iter().enumerate() {
        vals[k] = a.0[j][j];
        cols[k] = v.col(j);
    }
    (vals, Mat::from_cols(cols))
}

/// Eigenvalues (descending) of a complex Hermitian 4×4 matrix.
///
/// Works on the real 8×8 embedding `[[Re, -Im], [Im, Re]]`, whose spectrum is
/// that of `h` with every eigenvalue doubled.
pub fn hermitian_eigenvalues_4(h: &CMat4) -> Result<[f64; 4]> {
    for i in 0..4 {
        for j in 0..4 {
            let (x, y) = (h[i][j], h[j][i].conj());
            if !(x.re.is_finite() && x.im.is_finite()) {
                return Err(invalid("non-finite matrix entry"));
            }
            if (x - y).norm() > HERMITIAN_TOL {
                return Err(invalid(format!(
                    "matrix is not Hermitian at ({i},{j}): {x} vs {y}"
                )));
            }
        }
    }
    let mut big = Mat::<8>::zeros();
    for i in 0..4 {
        for j in 0..4 {
            // symmetrise exactly so Jacobi sees a symmetric matrix
            let re = 0.5 * (h[i][j].re + h[j][i].re);
            let im = 0.5 * (h[i][j].im - h[j][i].im);
            big.0[i][j] = re;
            big.0[i + 4][j + 4] = re;
            big.0[i][j + 4] = -im;
            big.0[i + 4][j] = im;
        }
    }
    let (vals, _) = symmetric_eigen(&big);
    Ok([vals[0], vals[2], vals[4], vals[6]])
}
