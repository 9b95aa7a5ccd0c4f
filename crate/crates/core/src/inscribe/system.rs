use alloc::vec;
use alloc::vec::Vec;

use super::InscribeError;
use crate::linalg::{self, Mat};
use crate::polar::Pose;
use crate::simspace::{self, SimilarityClass, SimplexConfig};
use crate::spheres::{RadialEmbedding, SpherePoint};

/// Vertex sphere points, scale and base point. Chart offsets are always
/// taken relative to the current points, so the chart part of the unknown
/// vector is zero at `self`.
#[derive(Debug, Clone, PartialEq)]
pub struct Unknowns {
    pub points: Vec<SpherePoint>,
    pub lambda: f64,
    pub center: Vec<f64>,
}

/// `k(k+1)`: chart coordinates, scale and base point.
pub fn unknown_count(k: usize) -> usize {
    k * (k + 1)
}

impl Unknowns {
    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Applies an unknown-vector step laid out as
    /// `[v_0, …, v_k, λ, c]`.
    pub fn step(&self, delta: &[f64]) -> Unknowns {
        self.step_scaled(delta, 1.0)
    }

    pub(crate) fn step_scaled(&self, delta: &[f64], a: f64) -> Unknowns {
        let k = self.dim();
        let m = k - 1;
        let points = self
            .points
            .iter()
            .enumerate()
            .map(|(i, u)| u.exp(&linalg::scaled(&delta[i * m..(i + 1) * m], a)))
            .collect();
        let off = (k + 1) * m;
        let mut center = self.center.clone();
        linalg::axpy(a, &delta[off + 1..off + 1 + k], &mut center);
        Unknowns { points, lambda: self.lambda + a * delta[off], center }
    }

    fn check(&self, k: usize) -> Result<(), InscribeError> {
        if self.dim() != k {
            return Err(InscribeError::Shape { expected: k, got: self.dim() });
        }
        if self.points.len() != k + 1 {
            return Err(InscribeError::Shape { expected: k + 1, got: self.points.len() });
        }
        if let Some(p) = self.points.iter().find(|p| p.dim() != k) {
            return Err(InscribeError::Shape { expected: k, got: p.dim() });
        }
        for i in 0..=k {
            for j in (i + 1)..=k {
                if self.points[i].angular_distance(&self.points[j]) < 1e-12 {
                    return Err(InscribeError::ChartSingularity { i, j });
                }
            }
        }
        Ok(())
    }
}

fn check_inputs(pose: &Pose, cls: &SimilarityClass, gamma: &RadialEmbedding) -> Result<usize, InscribeError> {
    let k = cls.dim();
    if pose.dim() != k {
        return Err(InscribeError::Shape { expected: k, got: pose.dim() });
    }
    if gamma.k != k {
        return Err(InscribeError::Shape { expected: k, got: gamma.k });
    }
    Ok(k)
}

/// Block 0 is `γ(u_0) − c`; block `i ≥ 1` is `γ(u_i) − c − λ·ρ_i·U·π_i0(Δ̂)`.
pub fn residual(
    x: &Unknowns,
    pose: &Pose,
    cls: &SimilarityClass,
    gamma: &RadialEmbedding,
) -> Result<Vec<f64>, InscribeError> {
    let k = check_inputs(pose, cls, gamma)?;
    x.check(k)?;
    let mut out = Vec::with_capacity(unknown_count(k));
    for (i, u) in x.points.iter().enumerate() {
        let mut r = gamma.eval(u)?;
        linalg::axpy(-1.0, &x.center, &mut r);
        if i > 0 {
            linalg::axpy(-x.lambda, &pose.u.mul_vec(&cls.offset(i)), &mut r);
        }
        out.extend(r);
    }
    Ok(out)
}

/// Analytic Jacobian of [`residual`] in the charts centered at `x`.
pub fn jacobian(
    x: &Unknowns,
    pose: &Pose,
    cls: &SimilarityClass,
    gamma: &RadialEmbedding,
) -> Result<Mat, InscribeError> {
    let k = check_inputs(pose, cls, gamma)?;
    x.check(k)?;
    let n = unknown_count(k);
    let m = k - 1;
    let lam_col = (k + 1) * m;
    let mut j = Mat::zeros(n, n);
    for (i, u) in x.points.iter().enumerate() {
        let frame = gamma.tangent_frame(u)?;
        for (a, d) in frame.derivs.iter().enumerate() {
            j.set_block_col(i * k, i * m + a, d);
        }
        if i > 0 {
            let w = pose.u.mul_vec(&cls.offset(i));
            j.set_block_col(i * k, lam_col, &linalg::scaled(&w, -1.0));
        }
        for d in 0..k {
            j[(i * k + d, lam_col + 1 + d)] = -1.0;
        }
    }
    Ok(j)
}

/// Central-difference Jacobian through the same charts.
pub fn jacobian_fd(
    x: &Unknowns,
    pose: &Pose,
    cls: &SimilarityClass,
    gamma: &RadialEmbedding,
    h: f64,
) -> Result<Mat, InscribeError> {
    let k = check_inputs(pose, cls, gamma)?;
    x.check(k)?;
    let n = unknown_count(k);
    let mut j = Mat::zeros(n, n);
    let mut e = vec![0.0; n];
    for col in 0..n {
        e[col] = h;
        let plus = residual(&x.step(&e), pose, cls, gamma)?;
        e[col] = -h;
        let minus = residual(&x.step(&e), pose, cls, gamma)?;
        e[col] = 0.0;
        for row in 0..n {
            j[(row, col)] = (plus[row] - minus[row]) / (2.0 * h);
        }
    }
    Ok(j)
}

/// `∂F/∂s` when the pose moves with derivative `du = dU/ds`.
pub(crate) fn pose_column(x: &Unknowns, du: &Mat, cls: &SimilarityClass) -> Vec<f64> {
    let k = x.dim();
    let mut col = vec![0.0; unknown_count(k)];
    for i in 1..=k {
        let w = du.mul_vec(&cls.offset(i));
        for d in 0..k {
            col[i * k + d] = -x.lambda * w[d];
        }
    }
    col
}

/// The exact solution on the round sphere: `u_i = U·p̂_i`, `λ = d_01(Δ̂)`,
/// `c = U·p̂_0`.
pub fn initial_guess_round(pose: &Pose, cls: &SimilarityClass) -> Unknowns {
    let points = cls.delta_hat.points.iter().map(|p| SpherePoint { u: normalized(&pose.u.mul_vec(p)) }).collect();
    Unknowns { points, lambda: cls.base_edge(), center: pose.u.mul_vec(&cls.delta_hat.points[0]) }
}

fn normalized(v: &[f64]) -> Vec<f64> {
    linalg::scaled(v, 1.0 / linalg::norm(v))
}

/// Seed from a base sphere point and a scale: places the similar copy at
/// pose `U` with vertex 0 on the surface and projects the other vertices
/// radially onto it.
pub fn radial_seed(
    cls: &SimilarityClass,
    gamma: &RadialEmbedding,
    pose: &Pose,
    u0: &SpherePoint,
    lambda: f64,
) -> Result<Unknowns, InscribeError> {
    let k = check_inputs(pose, cls, gamma)?;
    let c = gamma.eval(u0)?;
    let mut points = Vec::with_capacity(k + 1);
    points.push(u0.clone());
    for i in 1..=k {
        let mut q = c.clone();
        linalg::axpy(lambda, &pose.u.mul_vec(&cls.offset(i)), &mut q);
        points.push(SpherePoint::from_vector(&q)?);
    }
    Ok(Unknowns { points, lambda, center: c })
}

/// Pose and unknowns fitted to arbitrary sphere points: the pose is the
/// best-fit polar factor, `c = γ(u_0)` and `λ` the least-squares scale.
pub fn seed_from_points(
    cls: &SimilarityClass,
    gamma: &RadialEmbedding,
    points: &[SpherePoint],
) -> Result<(Pose, Unknowns), InscribeError> {
    let k = cls.dim();
    if points.len() != k + 1 {
        return Err(InscribeError::Shape { expected: k + 1, got: points.len() });
    }
    let q = points.iter().map(|u| gamma.eval(u)).collect::<Result<Vec<_>, _>>()?;
    let config = SimplexConfig::new(q.clone())?;
    let pose = simspace::fitted_pose(&config, cls)?;
    let c = q[0].clone();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 1..=k {
        let w = pose.u.mul_vec(&cls.offset(i));
        num += linalg::dot(&linalg::sub(&q[i], &c), &w);
        den += linalg::dot(&w, &w);
    }
    let x = Unknowns { points: points.to_vec(), lambda: num / den, center: c };
    Ok((pose, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simspace::normalize_reference;
    use core::f64::consts::PI;

    fn equilateral() -> SimilarityClass {
        let h = 3f64.sqrt() / 2.0;
        normalize_reference(&SimplexConfig::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]]).unwrap()).unwrap()
    }

    #[test]
    fn round_guess_is_exact() {
        let cls = equilateral();
        let g = RadialEmbedding::round(2);
        for a in [0.0, PI / 3.0, 2.0] {
            let pose = Pose::planar(a, 1);
            let x = initial_guess_round(&pose, &cls);
            assert!(linalg::norm(&residual(&x, &pose, &cls, &g).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn identity_pose_gives_reference() {
        let cls = equilateral();
        let x = initial_guess_round(&Pose::identity(2), &cls);
        for (u, p) in x.points.iter().zip(&cls.delta_hat.points) {
            assert!(linalg::max_abs_diff(&u.u, p) < 1e-15);
        }
    }

    #[test]
    fn coincident_charts_rejected() {
        let cls = equilateral();
        let g = RadialEmbedding::round(2);
        let u = SpherePoint::from_angle(0.3);
        let x = Unknowns { points: vec![u.clone(), u.clone(), u], lambda: 1.0, center: vec![0.0, 0.0] };
        let err = residual(&x, &Pose::identity(2), &cls, &g).unwrap_err();
        assert!(matches!(err, InscribeError::ChartSingularity { i: 0, j: 1 }));
    }

    #[test]
    fn analytic_matches_fd_on_ellipse() {
        let cls = equilateral();
        let g = RadialEmbedding::ellipse(1.2, 1.0).unwrap();
        let pose = Pose::planar(0.4, 1);
        let x = initial_guess_round(&pose, &cls);
        let a = jacobian(&x, &pose, &cls, &g).unwrap();
        let f = jacobian_fd(&x, &pose, &cls, &g, 1e-6).unwrap();
        assert!(a.sub(&f).max_abs() < 1e-8);
    }

    #[test]
    fn pose_column_matches_fd() {
        let cls = equilateral();
        let g = RadialEmbedding::ellipse(1.2, 1.0).unwrap();
        let x = initial_guess_round(&Pose::planar(0.4, 1), &cls);
        let h = 1e-6;
        let plus = residual(&x, &Pose::planar(0.4 + h, 1), &cls, &g).unwrap();
        let minus = residual(&x, &Pose::planar(0.4 - h, 1), &cls, &g).unwrap();
        let fd: Vec<f64> = plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * h)).collect();
        let col = pose_column(&x, &Pose::planar(0.4 + PI / 2.0, 1).u, &cls);
        assert!(linalg::max_abs_diff(&col, &fd) < 1e-8);
    }
}
