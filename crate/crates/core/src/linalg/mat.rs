use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Dense square real matrix stored row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct Mat<const N: usize>(pub [[f64; N]; N]);

pub type Mat2 = Mat<2>;
pub type Mat3 = Mat<3>;
pub type Mat4 = Mat<4>;

pub type Vec3 = [f64; 3];

impl<const N: usize> Mat<N> {
    pub const fn zeros() -> Self {
        Mat([[0.0; N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.0[i][i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: [[f64; N]; N]) -> Self {
        Mat(rows)
    }

    pub fn from_diag(d: [f64; N]) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.0[i][i] = d[i];
        }
        m
    }

    /// Builds a matrix whose `j`-th column is `cols[j]`.
    pub fn from_cols(cols: [[f64; N]; N]) -> Self {
        Mat(cols).transpose()
    }

    pub fn col(&self, j: usize) -> [f64; N] {
        let mut c = [0.0; N];
        for i in 0..N {
            c[i] = self.0[i][j];
        }
        c
    }

    pub fn row(&self, i: usize) -> [f64; N] {
        self.0[i]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                t.0[j][i] = self.0[i][j];
            }
        }
        t
    }

    pub fn trace(&self) -> f64 {
        (0..N).map(|i| self.0[i][i]).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|x| *x *= s);
        m
    }

    pub fn mul_vec(&self, v: &[f64; N]) -> [f64; N] {
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = (0..N).map(|k| self.0[i][k] * v[k]).sum();
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }

    /// Frobenius norm squared, i.e. `trace(MᵀM)`.
    pub fn frobenius_sq(&self) -> f64 {
        self.0.iter().flatten().map(|x| x * x).sum()
    }

    /// Deviation of `MᵀM` from the identity (max-abs entry).
    pub fn orthogonality_defect(&self) -> f64 {
        (self.transpose() * *self).max_abs_diff(&Self::identity())
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> f64 {
        let mut a = self.0;
        let mut det = 1.0;
        for c in 0..N {
            let p = (c..N)
                .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
                .unwrap_or(c);
            if a[p][c] == 0.0 {
                return 0.0;
            }
            if p != c {
                a.swap(p, c);
                det = -det;
            }
            det *= a[c][c];
            for r in c + 1..N {
                let f = a[r][c] / a[c][c];
                for k in c..N {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
        det
    }
}

impl<const N: usize> Default for Mat<N> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<const N: usize> Index<(usize, usize)> for Mat<N> {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl<const N: usize> IndexMut<(usize, usize)> for Mat<N> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

impl<const N: usize> Mul for Mat<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                out.0[i][j] = (0..N).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        out
    }
}

impl<const N: usize> Add for Mat<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for i in 0..N {
            for j in 0..N {
                self.0[i][j] += rhs.0[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Sub for Mat<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..N {
            for j in 0..N {
                self.0[i][j] -= rhs.0[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Neg for Mat<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<const N: usize> fmt::Debug for Mat<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl<const N: usize> Serialize for Mat<N> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = self.0.iter().map(|r| r.to_vec()).collect();
        rows.serialize(serializer)
    }
}

impl<'de, const N: usize> Deserialize<'de> for Mat<N> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        if rows.len() != N || rows.iter().any(|r| r.len() != N) {
            return Err(D::Error::custom(format!("expected a {N}x{N} matrix")));
        }
        let mut m = Self::zeros();
        for (i, r) in rows.iter().enumerate() {
            m.0[i].copy_from_slice(r);
        }
        Ok(m)
    }
}

/// Outer product `u vᵀ`.
pub fn outer<const N: usize>(u: &[f64; N], v: &[f64; N]) -> Mat<N> {
    let mut m = Mat::zeros();
    for i in 0..N {
        for j in 0..N {
            m.0[i][j] = u[i] * v[j];
        }
    }
    m
}

pub fn dot<const N: usize>(u: &[f64; N], v: &[f64; N]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm<const N: usize>(u: &[f64; N]) -> f64 {
    dot(u, u).sqrt()
}

pub fn cross(u: &Vec3, v: &Vec3) -> Vec3 {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

pub fn scaled<const N: usize>(u: &[f64; N], s: f64) -> [f64; N] {
    u.map(|x| x * s)
}

/// `a·u + b·v`
pub fn lin_comb<const N: usize>(a: f64, u: &[f64; N], b: f64, v: &[f64; N]) -> [f64; N] {
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = a * u[i] + b * v[i];
    }
    out
}

/// Angle between two unit vectors in `[0, π]`.
pub fn angle_between(u: &Vec3, v: &Vec3) -> f64 {
    // atan2 form keeps precision near 0 and π where acos does not.
    norm(&cross(u, v)).atan2(dot(u, v))
}

/// Rotation by `angle` about the unit `axis` (Rodrigues).
pub fn axis_angle(axis: &Vec3, angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    let [x, y, z] = *axis;
    let t = 1.0 - c;
    Mat([
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ])
}

/// Rotation given by a rotation vector `ω` (axis `ω/|ω|`, angle `|ω|`).
pub fn rotation_vector(omega: &Vec3) -> Mat3 {
    let angle = norm(omega);
    if angle < 1e-300 {
        return Mat3::identity();
    }
    axis_angle(&scaled(omega, 1.0 / angle), angle)
}
