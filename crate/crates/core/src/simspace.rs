//! The space of ordered configurations similar to a reference simplex.
//!
//! A configuration `q = (q_0, …, q_k)` in `R^k` is similar to the reference
//! when all distance ratios `r_ijl(q) = |q_i − q_j| / |q_i − q_l|` agree.
//! Every such configuration is reached from the normalized reference by an
//! orthogonal pose `U`, a scale `λ > 0` and a base point `q_0`:
//!
//! ```text
//! q_i = q_0 + λ·ρ_i·U·π_i0(Δ̂),   ρ_i = |p̂_i − p̂_0| / |p̂_1 − p̂_0|
//! ```
//!
//! and the pose is recovered as the orthogonal polar factor of
//! `Π(q) = [π_10(q) … π_k0(q)]`. Vertex labels are never canonicalized.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distgeo::{self, DistGeoError};
use crate::linalg::{self, Mat, SymEigen};
use crate::polar::{self, PolarError, Pose};

/// Default tolerance on ratio agreement (dimensionless).
pub const SIMILARITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("expected {expected} points in R^{k}, got {got}")]
    Shape { k: usize, expected: usize, got: usize },
    #[error("vertices {0} and {1} coincide")]
    CoincidentPoints(usize, usize),
    #[error("configuration is degenerate")]
    Degenerate,
    #[error("ratios do not form a positive-definite Gram matrix")]
    DegenerateClass,
    #[error("configuration is not similar to the reference (max ratio deviation {max_deviation:e})")]
    NotSimilar { max_deviation: f64 },
    #[error("scale λ = {lambda} lies on the boundary face; embed needs λ > 0")]
    BoundaryConfiguration { lambda: f64 },
    #[error(transparent)]
    Polar(#[from] PolarError),
    #[error(transparent)]
    DistGeo(#[from] DistGeoError),
}

/// An ordered `(k+1)`-tuple of points in `R^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexConfig {
    pub k: usize,
    pub points: Vec<Vec<f64>>,
}

impl SimplexConfig {
    /// Checks the shape and that the points are pairwise distinct.
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self, SimError> {
        let got = points.len();
        let k = got.saturating_sub(1);
        if got < 2 || points.iter().any(|p| p.len() != k) {
            return Err(SimError::Shape { k, expected: k + 1, got });
        }
        for i in 0..got {
            for j in (i + 1)..got {
                if points[i] == points[j] {
                    return Err(SimError::CoincidentPoints(i, j));
                }
            }
        }
        Ok(Self { k, points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `Π(q) = [π_10 … π_k0]`.
    pub fn pi_matrix(&self) -> Result<Mat, SimError> {
        let cols = (1..=self.k).map(|i| direction(self, i, 0)).collect::<Result<Vec<_>, _>>()?;
        Ok(Mat::from_cols(&cols))
    }

    /// Edge matrix `[q_1 − q_0 … q_k − q_0]`.
    pub fn edge_matrix(&self) -> Mat {
        let cols: Vec<Vec<f64>> = (1..=self.k).map(|i| linalg::sub(&self.points[i], &self.points[0])).collect();
        Mat::from_cols(&cols)
    }

    pub fn is_nondegenerate(&self) -> bool {
        let e = self.edge_matrix();
        let scale = self.diameter().powi(self.k as i32);
        e.det().abs() > 1e-12 * scale
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                d = d.max(linalg::distance(&self.points[i], &self.points[j]));
            }
        }
        d
    }

    /// Applies `x ↦ s·A·x + t` to every vertex.
    pub fn transformed(&self, a: &Mat, s: f64, t: &[f64]) -> Self {
        let points = self.points.iter().map(|p| linalg::add(&linalg::scaled(&a.mul_vec(p), s), t)).collect();
        Self { k: self.k, points }
    }

    pub fn distances(&self) -> Result<distgeo::DistanceSet, SimError> {
        Ok(distgeo::distances_of(&self.points)?)
    }
}

/// Unit vector `(q_i − q_j)/|q_i − q_j|`.
pub fn direction(q: &SimplexConfig, i: usize, j: usize) -> Result<Vec<f64>, SimError> {
    let v = linalg::sub(&q.points[i], &q.points[j]);
    let n = linalg::norm(&v);
    if n == 0.0 {
        return Err(SimError::CoincidentPoints(i, j));
    }
    Ok(linalg::scaled(&v, 1.0 / n))
}

/// `|q_i − q_j| / |q_i − q_l|`.
pub fn ratio(q: &SimplexConfig, i: usize, j: usize, l: usize) -> Result<f64, SimError> {
    let num = linalg::distance(&q.points[i], &q.points[j]);
    let den = linalg::distance(&q.points[i], &q.points[l]);
    if num == 0.0 {
        return Err(SimError::CoincidentPoints(i, j));
    }
    if den == 0.0 {
        return Err(SimError::CoincidentPoints(i, l));
    }
    Ok(num / den)
}

/// All ratios `r_ijl` over ordered triples of distinct labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioTable {
    n: usize,
    data: Vec<f64>,
}

impl RatioTable {
    pub fn of(q: &SimplexConfig) -> Result<Self, SimError> {
        let n = q.len();
        let mut data = vec![f64::NAN; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    if i != j && j != l && i != l {
                        data[(i * n + j) * n + l] = ratio(q, i, j, l)?;
                    }
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `r_ijl`; NaN unless `i, j, l` are distinct.
    pub fn get(&self, i: usize, j: usize, l: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + l]
    }

    /// Largest `|r_ijl(self) − r_ijl(other)|` over distinct triples.
    pub fn max_deviation(&self, other: &RatioTable) -> f64 {
        if self.n != other.n {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).filter(|(a, _)| !a.is_nan()).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Gram matrix `Πᵀ Π` from ratios alone, through the law of cosines:
/// entry `(i, j) = ½(r_0ij + r_0ji − r_ij0·r_ji0)`, unit diagonal.
pub fn gram_from_ratios(ratios: &RatioTable) -> Result<Mat, SimError> {
    let k = ratios.len() - 1;
    let mut g = Mat::identity(k);
    for i in 1..=k {
        for j in 1..=k {
            if i != j {
                g[(i - 1, j - 1)] =
                    0.5 * (ratios.get(0, i, j) + ratios.get(0, j, i) - ratios.get(i, j, 0) * ratios.get(j, i, 0));
            }
        }
    }
    let eig = SymEigen::new(&g);
    if !(eig.values[0] > 1e-12) {
        return Err(SimError::DegenerateClass);
    }
    Ok(g)
}

/// Normalized reference simplex and its derived quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityClass {
    /// Circumcenter at the origin, circumradius 1, pose the identity.
    pub delta_hat: SimplexConfig,
    pub ratios: RatioTable,
    /// `Π(Δ̂)`; equals `p` up to rounding.
    pub pi: Mat,
    /// Symmetric positive-definite `(Π(Δ̂)ᵀ Π(Δ̂))^{1/2}`.
    pub p: Mat,
    /// `ρ_i = d_0i / d_01` of the reference, `ρ_0 = 0`, `ρ_1 = 1`.
    pub rho: Vec<f64>,
}

impl SimilarityClass {
    pub fn dim(&self) -> usize {
        self.delta_hat.k
    }

    /// `d_01` of the normalized reference.
    pub fn base_edge(&self) -> f64 {
        linalg::distance(&self.delta_hat.points[1], &self.delta_hat.points[0])
    }

    /// Reference direction `π_i0(Δ̂)` for `i ≥ 1`.
    pub fn reference_direction(&self, i: usize) -> Vec<f64> {
        self.pi.col(i - 1)
    }

    /// `ρ_i·π_i0(Δ̂)`, the offset of vertex `i` from vertex 0 at unit scale
    /// and identity pose.
    pub fn offset(&self, i: usize) -> Vec<f64> {
        linalg::scaled(&self.reference_direction(i), self.rho[i])
    }
}

/// Translates the circumcenter to the origin, scales the circumradius to 1
/// and removes the pose, so that `Π(Δ̂) = P(Δ̂)`.
pub fn normalize_reference(delta: &SimplexConfig) -> Result<SimilarityClass, SimError> {
    let k = delta.k;
    if delta.len() != k + 1 {
        return Err(SimError::Shape { k, expected: k + 1, got: delta.len() });
    }
    if !delta.is_nondegenerate() {
        return Err(SimError::Degenerate);
    }
    let sphere = distgeo::circumcenter(&delta.points)?;
    let centered = SimplexConfig {
        k,
        points: delta
            .points
            .iter()
            .map(|p| linalg::scaled(&linalg::sub(p, &sphere.center), 1.0 / sphere.radius))
            .collect(),
    };
    let (pose, p) = polar::polar_decompose(&centered.pi_matrix()?)?;
    let ut = pose.u.transpose();
    let delta_hat = centered.transformed(&ut, 1.0, &vec![0.0; k]);
    let pi = delta_hat.pi_matrix()?;
    let ratios = RatioTable::of(&delta_hat)?;
    let deviation = ratios.max_deviation(&RatioTable::of(delta)?);
    if deviation > 1e-9 {
        return Err(SimError::NotSimilar { max_deviation: deviation });
    }
    gram_from_ratios(&ratios)?;
    let d01 = linalg::distance(&delta_hat.points[1], &delta_hat.points[0]);
    let rho = (0..=k).map(|i| linalg::distance(&delta_hat.points[i], &delta_hat.points[0]) / d01).collect();
    Ok(SimilarityClass { delta_hat, ratios, pi, p, rho })
}

/// Orthogonal `U` with `Π(q) = U·P(Δ)`.
pub fn pose(q: &SimplexConfig, cls: &SimilarityClass) -> Result<Pose, SimError> {
    pose_with_tol(q, cls, SIMILARITY_TOL)
}

pub fn pose_with_tol(q: &SimplexConfig, cls: &SimilarityClass, tol: f64) -> Result<Pose, SimError> {
    check_shape(q, cls)?;
    let deviation = RatioTable::of(q)?.max_deviation(&cls.ratios);
    if !(deviation <= tol) {
        return Err(SimError::NotSimilar { max_deviation: deviation });
    }
    Ok(polar::polar_decompose(&q.pi_matrix()?)?.0)
}

/// Best-fit pose of an arbitrary non-degenerate configuration: the
/// orthogonal polar factor of `Π(q)·P⁻¹`.
pub fn fitted_pose(q: &SimplexConfig, cls: &SimilarityClass) -> Result<Pose, SimError> {
    check_shape(q, cls)?;
    let (_, p_inv) = polar::spd_factors(&cls.p.symmetrized())?;
    Ok(polar::polar_decompose(&q.pi_matrix()?.mul(&p_inv))?.0)
}

fn check_shape(q: &SimplexConfig, cls: &SimilarityClass) -> Result<(), SimError> {
    let k = cls.dim();
    if q.k != k || q.len() != k + 1 {
        return Err(SimError::Shape { k, expected: k + 1, got: q.len() });
    }
    Ok(())
}

/// Pose, scale and base point of a configuration in the class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub pose: Pose,
    pub lambda: f64,
    pub center: Vec<f64>,
}

/// `q_0 = c`, `q_i = c + λ·ρ_i·U·π_i0(Δ̂)`.
pub fn embed(cls: &SimilarityClass, params: &SimParams) -> Result<SimplexConfig, SimError> {
    if !(params.lambda > 0.0) {
        return Err(SimError::BoundaryConfiguration { lambda: params.lambda });
    }
    let k = cls.dim();
    if params.pose.dim() != k || params.center.len() != k {
        return Err(SimError::Shape { k, expected: k + 1, got: params.center.len() });
    }
    let mut points = Vec::with_capacity(k + 1);
    points.push(params.center.clone());
    for i in 1..=k {
        let w = params.pose.u.mul_vec(&cls.offset(i));
        points.push(linalg::add(&params.center, &linalg::scaled(&w, params.lambda)));
    }
    Ok(SimplexConfig { k, points })
}

/// Inverse of [`embed`]: `(pose(q), |q_1 − q_0|, q_0)`.
pub fn ps(q: &SimplexConfig, cls: &SimilarityClass) -> Result<SimParams, SimError> {
    let pose = pose(q, cls)?;
    Ok(SimParams { pose, lambda: linalg::distance(&q.points[1], &q.points[0]), center: q.points[0].clone() })
}

/// Whether every ratio of `q` matches the reference within `tol`.
pub fn is_similar(q: &SimplexConfig, cls: &SimilarityClass, tol: f64) -> bool {
    if q.k != cls.dim() || q.len() != cls.dim() + 1 {
        return false;
    }
    match RatioTable::of(q) {
        Ok(r) => r.max_deviation(&cls.ratios) <= tol,
        Err(_) => false,
    }
}
