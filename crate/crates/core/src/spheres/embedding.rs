use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::expr::{RadialExpr, Var};
use super::SphereError;
use crate::linalg::{self, Mat};

/// Radii at or below this are rejected instead of producing points near the
/// origin.
pub const R_FLOOR: f64 = 1e-6;

/// `|sin φ|` below which the spherical chart is treated as singular.
const POLE_EPS: f64 = 1e-8;

/// A unit vector on `S^{k−1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    pub u: Vec<f64>,
}

impl SpherePoint {
    /// Normalizes `v`.
    pub fn from_vector(v: &[f64]) -> Result<Self, SphereError> {
        let n = linalg::norm(v);
        if !(n > 0.0) || !n.is_finite() {
            return Err(SphereError::ZeroVector);
        }
        Ok(Self { u: linalg::scaled(v, 1.0 / n) })
    }

    /// `(cos θ, sin θ)`.
    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self { u: vec![c, s] }
    }

    /// `(sin φ cos θ, sin φ sin θ, cos φ)`, `φ` measured from `+z`.
    pub fn from_spherical(phi: f64, theta: f64) -> Self {
        let (sp, cp) = phi.sin_cos();
        let (st, ct) = theta.sin_cos();
        Self { u: vec![sp * ct, sp * st, cp] }
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    /// Azimuth in `(−π, π]`.
    pub fn angle(&self) -> f64 {
        self.u[1].atan2(self.u[0])
    }

    /// `(φ, θ)` with `φ ∈ [0, π]`, `θ ∈ (−π, π]`.
    pub fn spherical(&self) -> (f64, f64) {
        let rho = self.u[0].hypot(self.u[1]);
        (rho.atan2(self.u[2]), self.u[1].atan2(self.u[0]))
    }

    /// Local chart basis: `(−u_y, u_x)` on the circle; on `S²` an
    /// orthonormal pair `(e_1, e_2)` with `(e_1, e_2, u)` right-handed.
    pub fn chart_basis(&self) -> Vec<Vec<f64>> {
        match self.dim() {
            2 => vec![vec![-self.u[1], self.u[0]]],
            3 => {
                let u = &self.u;
                // the coordinate axis least aligned with u
                let axis = (0..3)
                    .min_by(|&a, &b| u[a].abs().partial_cmp(&u[b].abs()).unwrap_or(core::cmp::Ordering::Equal))
                    .expect("three axes");
                let mut a = vec![0.0; 3];
                a[axis] = 1.0;
                let mut e1 = a.clone();
                linalg::axpy(-linalg::dot(&a, u), u, &mut e1);
                let n = linalg::norm(&e1);
                e1.iter_mut().for_each(|x| *x /= n);
                let e2 = linalg::cross3(u, &e1).to_vec();
                vec![e1, e2]
            }
            _ => unreachable!("spheres are S^1 or S^2"),
        }
    }

    /// Exponential map of the chart at `self`: moves along the great circle
    /// in direction `Σ v_j e_j` by arc length `|v|`.
    pub fn exp(&self, v: &[f64]) -> SpherePoint {
        let basis = self.chart_basis();
        self.exp_in(&basis, v)
    }

    pub(crate) fn exp_in(&self, basis: &[Vec<f64>], v: &[f64]) -> SpherePoint {
        let mut w = vec![0.0; self.dim()];
        for (e, vj) in basis.iter().zip(v) {
            linalg::axpy(*vj, e, &mut w);
        }
        let a = linalg::norm(&w);
        if a == 0.0 {
            return self.clone();
        }
        let (s, c) = a.sin_cos();
        let mut u = linalg::scaled(&self.u, c);
        linalg::axpy(s / a, &w, &mut u);
        let n = linalg::norm(&u);
        u.iter_mut().for_each(|x| *x /= n);
        SpherePoint { u }
    }

    /// Inverse of [`exp`](Self::exp) for points closer than the antipode.
    pub fn log(&self, other: &SpherePoint) -> Vec<f64> {
        let basis = self.chart_basis();
        let c = linalg::dot(&self.u, &other.u).clamp(-1.0, 1.0);
        let mut w = other.u.clone();
        linalg::axpy(-c, &self.u, &mut w);
        let s = linalg::norm(&w);
        let a = s.atan2(c);
        if s == 0.0 {
            return vec![0.0; basis.len()];
        }
        basis.iter().map(|e| a * linalg::dot(e, &w) / s).collect()
    }

    pub fn angular_distance(&self, other: &SpherePoint) -> f64 {
        let c = linalg::dot(&self.u, &other.u).clamp(-1.0, 1.0);
        let cross = match self.dim() {
            2 => (self.u[0] * other.u[1] - self.u[1] * other.u[0]).abs(),
            _ => linalg::norm(&linalg::cross3(&self.u, &other.u)),
        };
        cross.atan2(c)
    }
}

/// Radial function of a star-shaped embedding before the isotopy is applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RadialShape {
    Round,
    /// Ellipse `x²/a² + y²/b² = 1` (`k = 2`).
    Ellipse {
        a: f64,
        b: f64,
    },
    /// Ellipsoid with semi-axes `a, b, c` (`k = 3`).
    Ellipsoid {
        a: f64,
        b: f64,
        c: f64,
    },
    /// `a_0 + Σ_n (cos_n cos nθ + sin_n sin nθ)`, `n = 1, 2, …` (`k = 2`).
    TrigPoly {
        a0: f64,
        cos: Vec<f64>,
        sin: Vec<f64>,
    },
    Expr {
        expr: RadialExpr,
    },
}

impl RadialShape {
    pub fn expr(src: &str) -> Result<Self, SphereError> {
        Ok(RadialShape::Expr { expr: super::expr::parse_radial(src)? })
    }

    /// Radius and its gradient on the sphere (tangent to it) at unit `u`.
    fn jet(&self, u: &SpherePoint) -> (f64, Vec<f64>) {
        let k = u.dim();
        match self {
            RadialShape::Round => (1.0, vec![0.0; k]),
            RadialShape::Ellipse { a, b } => quadric_jet(u, &[*a, *b]),
            RadialShape::Ellipsoid { a, b, c } => quadric_jet(u, &[*a, *b, *c]),
            RadialShape::TrigPoly { a0, cos, sin } => {
                let theta = u.angle();
                let mut r = *a0;
                let mut dr = 0.0;
                for n in 0..cos.len().max(sin.len()) {
                    let cn = cos.get(n).copied().unwrap_or(0.0);
                    let sn = sin.get(n).copied().unwrap_or(0.0);
                    let m = (n + 1) as f64;
                    let (s, c) = (m * theta).sin_cos();
                    r += cn * c + sn * s;
                    dr += m * (sn * c - cn * s);
                }
                (r, vec![-u.u[1] * dr, u.u[0] * dr])
            }
            RadialShape::Expr { expr } => expr_jet(expr, u),
        }
    }

    fn value(&self, u: &SpherePoint) -> f64 {
        match self {
            RadialShape::Expr { expr } => {
                let (phi, theta) = angles(u);
                expr.value(phi, theta)
            }
            _ => self.jet(u).0,
        }
    }

    fn check_dim(&self, k: usize) -> Result<(), SphereError> {
        let ok = match self {
            RadialShape::Round => k == 2 || k == 3,
            RadialShape::Ellipse { a, b } => k == 2 && *a > 0.0 && *b > 0.0,
            RadialShape::Ellipsoid { a, b, c } => k == 3 && *a > 0.0 && *b > 0.0 && *c > 0.0,
            RadialShape::TrigPoly { .. } => k == 2,
            RadialShape::Expr { expr } => k == 3 || (k == 2 && !expr.uses(Var::Phi)),
        };
        if ok {
            Ok(())
        } else {
            Err(SphereError::UnsupportedShape { k })
        }
    }
}

fn angles(u: &SpherePoint) -> (f64, f64) {
    if u.dim() == 2 {
        (PI / 2.0, u.angle())
    } else {
        u.spherical()
    }
}

/// `r(x) = |x|·(Σ x_i²/a_i²)^{−1/2}` restricted to the unit sphere.
fn quadric_jet(u: &SpherePoint, axes: &[f64]) -> (f64, Vec<f64>) {
    let q: f64 = u.u.iter().zip(axes).map(|(x, a)| x * x / (a * a)).sum();
    let r = 1.0 / q.sqrt();
    let r3 = r * r * r;
    let grad = u.u.iter().zip(axes).map(|(x, a)| x * r - r3 * x / (a * a)).collect();
    (r, grad)
}

fn expr_jet(expr: &RadialExpr, u: &SpherePoint) -> (f64, Vec<f64>) {
    if u.dim() == 2 {
        let (r, _, dtheta) = expr.jet(PI / 2.0, u.angle());
        return (r, vec![-u.u[1] * dtheta, u.u[0] * dtheta]);
    }
    let (phi, theta) = u.spherical();
    let (r, dphi, dtheta) = expr.jet(phi, theta);
    let rho = u.u[0].hypot(u.u[1]);
    if rho < POLE_EPS {
        // θ is singular at the poles: take the tangential gradient by central
        // differences in the exponential chart instead.
        let basis = u.chart_basis();
        let h = 1e-6;
        let mut grad = vec![0.0; 3];
        for e in &basis {
            let plus = u.exp_in(&basis, &linalg::scaled(&basis_coords(&basis, e), h));
            let minus = u.exp_in(&basis, &linalg::scaled(&basis_coords(&basis, e), -h));
            let (pp, pt) = plus.spherical();
            let (mp, mt) = minus.spherical();
            let d = (expr.value(pp, pt) - expr.value(mp, mt)) / (2.0 * h);
            linalg::axpy(d, e, &mut grad);
        }
        return (r, grad);
    }
    let (x, y, z) = (u.u[0], u.u[1], u.u[2]);
    let grad_phi = [x * z / rho, y * z / rho, -rho];
    let grad_theta = [-y / (rho * rho), x / (rho * rho), 0.0];
    let grad = (0..3).map(|i| dphi * grad_phi[i] + dtheta * grad_theta[i]).collect();
    (r, grad)
}

fn basis_coords(basis: &[Vec<f64>], e: &[f64]) -> Vec<f64> {
    basis.iter().map(|b| linalg::dot(b, e)).collect()
}

fn sample_grid(k: usize) -> Vec<SpherePoint> {
    match k {
        2 => (0..720).map(|i| SpherePoint::from_angle(2.0 * PI * i as f64 / 720.0)).collect(),
        _ => {
            let mut pts = Vec::with_capacity(90 * 180);
            for i in 0..90 {
                let phi = PI * (i as f64 + 0.5) / 90.0;
                for j in 0..180 {
                    pts.push(SpherePoint::from_spherical(phi, 2.0 * PI * j as f64 / 180.0));
                }
            }
            pts
        }
    }
}

/// A star-shaped embedding `u ↦ r_t(u)·u` of `S^{k−1}` in `R^k` with
/// `r_t = (1 − t) + t·r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialEmbedding {
    pub k: usize,
    pub shape: RadialShape,
    /// Isotopy parameter; `0` is the round sphere, `1` the shape itself.
    pub t: f64,
    /// Smallest radius of `r_t` on the sampling grid.
    pub r_min: f64,
    shape_min: f64,
    shape_argmin: Vec<f64>,
}

/// Ambient point and chart derivatives at a sphere point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentFrame {
    pub point: Vec<f64>,
    pub radius: f64,
    /// Orthonormal chart basis `e_j` of `T_u S^{k−1}`.
    pub basis: Vec<Vec<f64>>,
    /// `∂γ/∂v_j = (∇r·e_j)·u + r·e_j`; spans the tangent space of the surface.
    pub derivs: Vec<Vec<f64>>,
}

impl RadialEmbedding {
    pub fn new(k: usize, shape: RadialShape) -> Result<Self, SphereError> {
        Self::with_t(k, shape, 1.0)
    }

    pub fn round(k: usize) -> Self {
        Self::new(k, RadialShape::Round).expect("round sphere is valid")
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self, SphereError> {
        Self::new(2, RadialShape::Ellipse { a, b })
    }

    pub fn from_expr(k: usize, src: &str) -> Result<Self, SphereError> {
        Self::new(k, RadialShape::expr(src)?)
    }

    fn with_t(k: usize, shape: RadialShape, t: f64) -> Result<Self, SphereError> {
        if !(2..=3).contains(&k) {
            return Err(SphereError::UnsupportedShape { k });
        }
        shape.check_dim(k)?;
        let (shape_min, argmin) = sample_grid(k)
            .into_iter()
            .map(|u| (shape.value(&u), u))
            .fold((f64::INFINITY, None), |acc, (r, u)| if r < acc.0 { (r, Some(u)) } else { acc });
        let shape_argmin = argmin.map(|u| u.u).unwrap_or_default();
        let mut emb = Self { k, shape, t, r_min: 0.0, shape_min, shape_argmin };
        emb.r_min = emb.blend(shape_min);
        Ok(emb)
    }

    fn blend(&self, r: f64) -> f64 {
        (1.0 - self.t) + self.t * r
    }

    /// The embedding at isotopy time `t`. Fails if the sampled radius of
    /// `r_t` drops to the floor.
    pub fn isotopy(&self, t: f64) -> Result<Self, SphereError> {
        if !(0.0..=1.0).contains(&t) {
            return Err(SphereError::IsotopyRange(t));
        }
        let mut emb = self.clone();
        emb.t = t;
        // r_t is affine in t, so its minimum is the blend of the shape minimum
        emb.r_min = emb.blend(self.shape_min);
        if emb.r_min <= R_FLOOR {
            return Err(SphereError::PositivityViolation { u: emb.shape_argmin, t, radius: emb.r_min });
        }
        Ok(emb)
    }

    pub fn is_round(&self) -> bool {
        self.t == 0.0 || matches!(self.shape, RadialShape::Round)
    }

    /// `r_t(u)` without the floor check.
    pub fn radius(&self, u: &SpherePoint) -> f64 {
        self.blend(self.shape.value(u))
    }

    fn checked_radius(&self, u: &SpherePoint, r: f64) -> Result<f64, SphereError> {
        if u.dim() != self.k {
            return Err(SphereError::DimensionMismatch { expected: self.k, got: u.dim() });
        }
        if !(r > R_FLOOR) {
            return Err(SphereError::DegenerateRadius { u: u.u.clone(), radius: r });
        }
        Ok(r)
    }

    /// `r_t(u)·u`.
    pub fn eval(&self, u: &SpherePoint) -> Result<Vec<f64>, SphereError> {
        let r = self.checked_radius(u, self.radius(u))?;
        Ok(linalg::scaled(&u.u, r))
    }

    /// Radius and tangential gradient of `r_t`.
    pub fn radial_jet(&self, u: &SpherePoint) -> (f64, Vec<f64>) {
        let (r, g) = self.shape.jet(u);
        ((1.0 - self.t) + self.t * r, linalg::scaled(&g, self.t))
    }

    /// Point and chart derivatives at `u` in the exponential chart
    /// centered there.
    pub fn tangent_frame(&self, u: &SpherePoint) -> Result<TangentFrame, SphereError> {
        let (r, grad) = self.radial_jet(u);
        let r = self.checked_radius(u, r)?;
        let basis = u.chart_basis();
        let derivs = basis
            .iter()
            .map(|e| {
                let mut d = linalg::scaled(&u.u, linalg::dot(&grad, e));
                linalg::axpy(r, e, &mut d);
                d
            })
            .collect();
        Ok(TangentFrame { point: linalg::scaled(&u.u, r), radius: r, basis, derivs })
    }

    /// Central-difference version of [`tangent_frame`](Self::tangent_frame)
    /// derivatives.
    pub fn tangent_frame_fd(&self, u: &SpherePoint, h: f64) -> Result<Vec<Vec<f64>>, SphereError> {
        let basis = u.chart_basis();
        let mut out = Vec::with_capacity(basis.len());
        for j in 0..basis.len() {
            let mut v = vec![0.0; basis.len()];
            v[j] = h;
            let plus = self.eval(&u.exp_in(&basis, &v))?;
            v[j] = -h;
            let minus = self.eval(&u.exp_in(&basis, &v))?;
            out.push(linalg::scaled(&linalg::sub(&plus, &minus), 0.5 / h));
        }
        Ok(out)
    }

    /// Matrix whose columns are the chart derivatives.
    pub fn derivative_matrix(&self, u: &SpherePoint) -> Result<Mat, SphereError> {
        Ok(Mat::from_cols(&self.tangent_frame(u)?.derivs))
    }
}
