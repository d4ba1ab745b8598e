//! Fixed-size real linear algebra: small dense matrices, SVD, symmetric and
//! Hermitian eigenvalues, and orthonormal frames.

mod eigen;
mod frame;
mod mat;
mod svd;

pub use eigen::{hermitian_eigenvalues_4, symmetric_eigen, CMat4};
pub use frame::{complete_frame, rotation_between, Frame3};
pub use mat::{
    angle_between, axis_angle, cross, dot, lin_comb, norm, outer, rotation_vector, scaled, Mat,
    Mat2, Mat3, Mat4, Vec3,
};
pub use svd::{Svd, SvdFactors};
