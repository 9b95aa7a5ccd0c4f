//! Symmetric positive-definite square roots and the polar factorization
//! `A = U·P` of a nonsingular square matrix.

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, Mat, SymEigen};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolarError {
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("matrix is rank deficient (|det| = {0:e})")]
    RankDeficient(f64),
    #[error("matrix is not orthogonal (|UᵀU − I| = {0:e})")]
    NotOrthogonal(f64),
}

/// An orthogonal matrix together with the sign of its determinant.
/// `det_sign = +1` selects the rotation component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub u: Mat,
    pub det_sign: i8,
}

impl Pose {
    pub fn identity(k: usize) -> Self {
        Self { u: Mat::identity(k), det_sign: 1 }
    }

    /// Wraps an orthogonal matrix; rejects anything further than `1e-10`
    /// from orthogonal in max-entry norm.
    pub fn from_matrix(u: Mat) -> Result<Self, PolarError> {
        if !u.is_square() {
            return Err(PolarError::NotSquare);
        }
        let defect = u.transpose().mul(&u).sub(&Mat::identity(u.rows())).max_abs();
        if defect > 1e-10 {
            return Err(PolarError::NotOrthogonal(defect));
        }
        let det_sign = if u.det() > 0.0 { 1 } else { -1 };
        Ok(Self { u, det_sign })
    }

    /// Planar pose `R(angle)` for `det_sign = +1`, or `R(angle)·diag(1, −1)`
    /// for `det_sign = −1`.
    pub fn planar(angle: f64, det_sign: i8) -> Self {
        let (s, c) = angle.sin_cos();
        let f = if det_sign < 0 { -1.0 } else { 1.0 };
        let u = Mat::from_rows(&[[c, -s * f], [s, c * f]]);
        Self { u, det_sign: if det_sign < 0 { -1 } else { 1 } }
    }

    pub fn dim(&self) -> usize {
        self.u.rows()
    }

    /// Angle of the rotation part for `k = 2`: `atan2(U₁₀, U₀₀)`.
    pub fn planar_angle(&self) -> f64 {
        debug_assert_eq!(self.dim(), 2);
        self.u[(1, 0)].atan2(self.u[(0, 0)])
    }

    pub fn orthogonality_defect(&self) -> f64 {
        self.u.transpose().mul(&self.u).sub(&Mat::identity(self.dim())).max_abs()
    }

    /// Left-composition `R·U`.
    pub fn compose_left(&self, r: &Mat) -> Pose {
        let u = r.mul(&self.u);
        let det_sign = if u.det() > 0.0 { 1 } else { -1 };
        Pose { u, det_sign }
    }

    pub fn frobenius_distance(&self, other: &Pose) -> f64 {
        self.u.sub(&other.u).frobenius_norm()
    }
}

/// Unique SPD `B` with `B² = M`, via the symmetric eigendecomposition.
pub fn spd_sqrt(m: &Mat) -> Result<Mat, PolarError> {
    Ok(spd_factors(m)?.0)
}

/// `(M^{1/2}, M^{−1/2})`.
pub(crate) fn spd_factors(m: &Mat) -> Result<(Mat, Mat), PolarError> {
    if !m.is_square() {
        return Err(PolarError::NotSquare);
    }
    let scale = m.max_abs().max(1.0);
    let asym = m.asymmetry();
    if asym > 1e-12 * scale {
        return Err(PolarError::NotSymmetric(asym));
    }
    let eig = SymEigen::new(m);
    let lo = eig.values[0];
    let hi = *eig.values.last().expect("nonempty");
    if !(lo > 1e-14 * hi.abs().max(f64::MIN_POSITIVE)) {
        return Err(PolarError::NotPositiveDefinite(lo));
    }
    Ok((eig.map(|x| x.sqrt()), eig.map(|x| 1.0 / x.sqrt())))
}

/// Polar factorization `A = U·P` with `P = (AᵀA)^{1/2}` and `U = A·P⁻¹`,
/// followed by one Gram-Schmidt pass on `U`.
pub fn polar_decompose(a: &Mat) -> Result<(Pose, Mat), PolarError> {
    if !a.is_square() {
        return Err(PolarError::NotSquare);
    }
    let k = a.rows();
    let det = a.det();
    if det.abs() <= 1e-12 * a.frobenius_norm().powi(k as i32) || !det.is_finite() {
        return Err(PolarError::RankDeficient(det.abs()));
    }
    let ata = a.transpose().mul(a).symmetrized();
    let (p, p_inv) = spd_factors(&ata)?;
    let u = linalg::orthonormalize_columns(&a.mul(&p_inv));
    let det_sign = if det > 0.0 { 1 } else { -1 };
    Ok((Pose { u, det_sign }, p))
}
