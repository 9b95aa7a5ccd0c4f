use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::newton::{newton_solve, NewtonOptions};
use super::system::{initial_guess_round, jacobian, pose_column, residual, unknown_count, Unknowns};
use super::{InscribeError, InscribedSolution};
use crate::linalg::{self, Lu, Mat};
use crate::polar::Pose;
use crate::simspace::SimilarityClass;
use crate::spheres::RadialEmbedding;

/// A closed one-parameter path of poses, `2π`-periodic in its parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PosePath {
    /// `R(s)` for `det_sign = +1`, `R(s)·diag(1, −1)` otherwise.
    Planar { det_sign: i8 },
    /// `exp(s·[a]×)·U_0` for a unit axis `a`.
    Axis { axis: [f64; 3], base: Pose },
}

impl PosePath {
    pub fn dim(&self) -> usize {
        match self {
            PosePath::Planar { .. } => 2,
            PosePath::Axis { .. } => 3,
        }
    }

    pub fn pose(&self, s: f64) -> Pose {
        match self {
            PosePath::Planar { det_sign } => Pose::planar(s, *det_sign),
            PosePath::Axis { axis, base } => {
                let (sn, cs) = s.sin_cos();
                let k = cross_matrix(axis);
                let r = Mat::identity(3).add(&k.scale(sn)).add(&k.mul(&k).scale(1.0 - cs));
                Pose { u: r.mul(&base.u), det_sign: base.det_sign }
            }
        }
    }

    /// `dU/ds`.
    pub fn derivative(&self, s: f64) -> Mat {
        match self {
            PosePath::Planar { det_sign } => Pose::planar(s + PI / 2.0, *det_sign).u,
            PosePath::Axis { axis, base } => {
                let (sn, cs) = s.sin_cos();
                let k = cross_matrix(axis);
                k.scale(cs).add(&k.mul(&k).scale(sn)).mul(&base.u)
            }
        }
    }
}

fn cross_matrix(a: &[f64; 3]) -> Mat {
    let n = linalg::norm(a);
    let (x, y, z) = (a[0] / n, a[1] / n, a[2] / n);
    Mat::from_rows(&[[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceOptions {
    /// Nominal steps per full turn of the pose parameter; the arc-length
    /// step never exceeds `4π / n_steps`.
    pub n_steps: usize,
    /// Accepted steps before the trace is given up as open, in multiples of
    /// `n_steps`.
    pub step_limit: usize,
    /// Largest angle any vertex may move in one step.
    pub max_jump: f64,
    pub closure_tol: f64,
    pub corrector_iter: usize,
    pub min_step: f64,
    pub newton: NewtonOptions,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            n_steps: 256,
            step_limit: 40,
            max_jump: 0.1,
            closure_tol: 1e-6,
            corrector_iter: 8,
            min_step: 1e-7,
            newton: NewtonOptions::default(),
        }
    }
}

/// An ordered chain of solutions along a pose path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyTrace {
    pub path: PosePath,
    pub solutions: Vec<InscribedSolution>,
    /// Unwrapped pose parameter of each solution.
    pub parameters: Vec<f64>,
    /// Net turns of the pose parameter; meaningful once closed.
    pub pose_winding: i64,
    pub closed: bool,
    pub arc_steps: usize,
    pub arc_length: f64,
    /// Net turns of each vertex around the origin (`k = 2`).
    pub vertex_windings: Vec<i64>,
}

impl FamilyTrace {
    /// The solutions of this trace at pose parameter `s` (mod `2π`), each
    /// re-solved at exactly that pose.
    pub fn crossings(
        &self,
        s: f64,
        cls: &SimilarityClass,
        gamma: &RadialEmbedding,
        opts: &NewtonOptions,
    ) -> Vec<InscribedSolution> {
        let mut out: Vec<InscribedSolution> = Vec::new();
        let pose = self.path.pose(s);
        for m in 0..self.parameters.len().saturating_sub(1) {
            let (a, b) = (self.parameters[m], self.parameters[m + 1]);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let mut n = ((lo - s) / (2.0 * PI)).ceil();
            while s + 2.0 * PI * n < hi {
                let target = s + 2.0 * PI * n;
                let seed = if (target - a).abs() <= (target - b).abs() { m } else { m + 1 };
                if let Ok(sol) = newton_solve(&self.solutions[seed].unknowns(), &pose, cls, gamma, opts) {
                    if !out.iter().any(|o| o.distance(&sol) < 1e-7) {
                        out.push(sol);
                    }
                }
                n += 1.0;
            }
        }
        out
    }
}

/// Orientation convention for traced families: the sign of `det J` on the
/// round sphere at the path's starting pose. Tangents are oriented so that
/// `det [J_x J_s; τᵀ]` carries this sign, which makes the round family turn
/// positively.
pub fn orientation_sign(cls: &SimilarityClass, path: &PosePath, s0: f64) -> Result<f64, InscribeError> {
    let pose = path.pose(s0);
    let round = RadialEmbedding::round(cls.dim());
    let j = jacobian(&initial_guess_round(&pose, cls), &pose, cls, &round)?;
    let d = Lu::new(&j).det();
    if d == 0.0 || !d.is_finite() {
        return Err(InscribeError::SingularJacobian { iteration: 0 });
    }
    Ok(d.signum())
}

#[derive(Clone)]
struct Point {
    x: Unknowns,
    s: f64,
}

/// Tangent with vertex components stored as ambient vectors, so it can be
/// carried between charts.
#[derive(Clone)]
struct Tangent {
    verts: Vec<Vec<f64>>,
    rest: Vec<f64>,
}

impl Tangent {
    fn from_chart(v: &[f64], x: &Unknowns) -> Self {
        let k = x.dim();
        let m = k - 1;
        let verts = x
            .points
            .iter()
            .enumerate()
            .map(|(i, u)| {
                let mut w = vec![0.0; k];
                for (j, e) in u.chart_basis().iter().enumerate() {
                    linalg::axpy(v[i * m + j], e, &mut w);
                }
                w
            })
            .collect();
        Tangent { verts, rest: v[(k + 1) * m..].to_vec() }
    }

    fn to_chart(&self, x: &Unknowns) -> Vec<f64> {
        let mut out = Vec::with_capacity(unknown_count(x.dim()) + 1);
        for (u, w) in x.points.iter().zip(&self.verts) {
            out.extend(u.chart_basis().iter().map(|e| linalg::dot(e, w)));
        }
        out.extend_from_slice(&self.rest);
        out
    }
}

struct Tracer<'a> {
    cls: &'a SimilarityClass,
    gamma: &'a RadialEmbedding,
    path: &'a PosePath,
    opts: &'a TraceOptions,
}

impl Tracer<'_> {
    fn residual(&self, p: &Point) -> Result<Vec<f64>, InscribeError> {
        residual(&p.x, &self.path.pose(p.s), self.cls, self.gamma)
    }

    /// `[J_x | J_s]`, `N × (N+1)`.
    fn augmented(&self, p: &Point) -> Result<Mat, InscribeError> {
        let j = jacobian(&p.x, &self.path.pose(p.s), self.cls, self.gamma)?;
        let col = pose_column(&p.x, &self.path.derivative(p.s), self.cls);
        let n = j.rows();
        let mut a = Mat::zeros(n, n + 1);
        for r in 0..n {
            for c in 0..n {
                a[(r, c)] = j[(r, c)];
            }
            a[(r, n)] = col[r];
        }
        Ok(a)
    }

    /// Unit tangent with `τ·row > 0`.
    fn tangent(&self, p: &Point, row: &[f64]) -> Result<Option<Vec<f64>>, InscribeError> {
        let a = self.augmented(p)?;
        let n = a.rows();
        let mut rhs = vec![0.0; n + 1];
        rhs[n] = 1.0;
        Ok(Lu::new(&bordered(&a, row)).solve(&rhs).map(|t| {
            let len = linalg::norm(&t);
            linalg::scaled(&t, 1.0 / len)
        }))
    }

    fn corrector(&self, p: &Point, tau: &Tangent, h: f64) -> Result<Option<(Point, usize)>, InscribeError> {
        let mut z = advance(p, &tau.to_chart(&p.x), h);
        let mut prev = f64::INFINITY;
        for it in 0..=self.opts.corrector_iter {
            let f = match self.residual(&z) {
                Ok(f) => f,
                Err(InscribeError::Sphere(_)) | Err(InscribeError::ChartSingularity { .. }) => return Ok(None),
                Err(e) => return Err(e),
            };
            if linalg::norm(&f) < self.opts.newton.threshold(&z.x) {
                return Ok(Some((z, it)));
            }
            if it == self.opts.corrector_iter {
                break;
            }
            let a = self.augmented(&z)?;
            let mut rhs: Vec<f64> = f.iter().map(|v| -v).collect();
            rhs.push(0.0);
            let Some(delta) = Lu::new(&bordered(&a, &tau.to_chart(&z.x))).solve(&rhs) else {
                return Ok(None);
            };
            let size = linalg::norm(&delta);
            if !size.is_finite() || (it > 0 && size > 0.5 * prev && size > 1e-12) {
                return Ok(None);
            }
            prev = size;
            z = advance(&z, &delta, 1.0);
            if z.x.lambda < self.opts.newton.lambda_min {
                return Ok(None);
            }
        }
        Ok(None)
    }

    fn condition(&self, p: &Point) -> f64 {
        jacobian(&p.x, &self.path.pose(p.s), self.cls, self.gamma)
            .map(|j| linalg::condition_number(&j))
            .unwrap_or(f64::INFINITY)
    }

    fn solution(&self, p: &Point) -> Result<InscribedSolution, InscribeError> {
        newton_solve(&p.x, &self.path.pose(p.s), self.cls, self.gamma, &self.opts.newton)
    }
}

fn bordered(a: &Mat, row: &[f64]) -> Mat {
    let n = a.rows();
    let mut b = Mat::zeros(n + 1, n + 1);
    for r in 0..n {
        for c in 0..=n {
            b[(r, c)] = a[(r, c)];
        }
    }
    for (c, v) in row.iter().enumerate() {
        b[(n, c)] = *v;
    }
    b
}

fn advance(p: &Point, v: &[f64], h: f64) -> Point {
    let n = v.len() - 1;
    Point { x: p.x.step_scaled(&v[..n], h), s: p.s + h * v[n] }
}

fn wrap(a: f64) -> f64 {
    a - 2.0 * PI * (a / (2.0 * PI)).round()
}

fn point_distance(a: &Point, b: &Point) -> f64 {
    let ang = a.x.points.iter().zip(&b.x.points).map(|(p, q)| p.angular_distance(q)).fold(0.0, f64::max);
    ang.max((a.x.lambda - b.x.lambda).abs())
        .max(linalg::max_abs_diff(&a.x.center, &b.x.center))
        .max(wrap(a.s - b.s).abs())
}

fn signed_turn(a: &[f64], b: &[f64]) -> f64 {
    (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1])
}

/// Continues the solution `start` (at path parameter `s0`) along the pose
/// path by pseudo-arclength continuation until it returns to `start`.
pub fn trace_pose_loop(
    cls: &SimilarityClass,
    gamma: &RadialEmbedding,
    path: &PosePath,
    start: &InscribedSolution,
    s0: f64,
    opts: &TraceOptions,
) -> Result<FamilyTrace, InscribeError> {
    let k = cls.dim();
    if path.dim() != k {
        return Err(InscribeError::Dimension { expected: k, got: path.dim() });
    }
    let tracer = Tracer { cls, gamma, path, opts };
    let sigma = orientation_sign(cls, path, s0)?;
    let n = unknown_count(k);
    let origin = Point { x: start.unknowns(), s: s0 };

    let mut tau = None;
    for axis in (0..=n).rev() {
        let mut row = vec![0.0; n + 1];
        row[axis] = 1.0;
        if let Some(t) = tracer.tangent(&origin, &row)? {
            tau = Some(t);
            break;
        }
    }
    let mut tau = tau.ok_or(InscribeError::SingularJacobian { iteration: 0 })?;
    let d = Lu::new(&bordered(&tracer.augmented(&origin)?, &tau)).det();
    if d.signum() != sigma {
        tau.iter_mut().for_each(|v| *v = -*v);
    }
    let mut tau = Tangent::from_chart(&tau, &origin.x);

    let h_max = 4.0 * PI / opts.n_steps.max(1) as f64;
    let limit = opts.step_limit * opts.n_steps.max(1);
    let mut h = h_max;
    let mut p = origin.clone();
    let mut trace = FamilyTrace {
        path: path.clone(),
        solutions: vec![start.clone()],
        parameters: vec![s0],
        pose_winding: 0,
        closed: false,
        arc_steps: 0,
        arc_length: 0.0,
        vertex_windings: vec![],
    };
    let mut turns = vec![0.0; if k == 2 { k + 1 } else { 0 }];
    let mut farthest: f64 = 0.0;

    while trace.arc_steps < limit {
        let (q, iters, tq) = loop {
            let accepted = match tracer.corrector(&p, &tau, h)? {
                Some((q, iters)) => {
                    let jump =
                        p.x.points.iter().zip(&q.x.points).map(|(a, b)| a.angular_distance(b)).fold(0.0, f64::max);
                    let row = tau.to_chart(&q.x);
                    match tracer.tangent(&q, &row)? {
                        Some(tq) if jump <= opts.max_jump && linalg::dot(&tq, &row) > 0.9 * linalg::norm(&row) => {
                            Some((q, iters, tq))
                        }
                        _ => None,
                    }
                }
                None => None,
            };
            if let Some(a) = accepted {
                break a;
            }
            h *= 0.5;
            if h < opts.min_step {
                return Err(InscribeError::TraceBreakdown { parameter: p.s, condition: tracer.condition(&p) });
            }
        };
        if k == 2 {
            for (i, t) in turns.iter_mut().enumerate() {
                *t += signed_turn(&p.x.points[i].u, &q.x.points[i].u);
            }
        }
        trace.arc_steps += 1;
        trace.arc_length += h;
        tau = Tangent::from_chart(&tq, &q.x);
        let step = h;
        if iters <= 2 {
            h = (h * 1.5).min(h_max);
        }
        p = q;
        trace.solutions.push(tracer.solution(&p)?);
        trace.parameters.push(p.s);

        let d = point_distance(&p, &origin);
        farthest = farthest.max(d);
        if farthest > 4.0 * step && d < 2.0 * step {
            let w = ((p.s - s0) / (2.0 * PI)).round();
            let s_close = s0 + 2.0 * PI * w;
            if (p.s - s_close).abs() < 4.0 * step {
                let pose = path.pose(s_close);
                if let Ok(sol) = newton_solve(&p.x, &pose, cls, gamma, &opts.newton) {
                    if sol.distance(start) < opts.closure_tol {
                        if k == 2 {
                            for (i, t) in turns.iter_mut().enumerate() {
                                *t += signed_turn(&p.x.points[i].u, &sol.u[i].u);
                            }
                        }
                        trace.solutions.push(sol);
                        trace.parameters.push(s_close);
                        trace.closed = true;
                        trace.pose_winding = w as i64;
                        break;
                    }
                }
            }
        }
    }
    if !trace.closed {
        let last = *trace.parameters.last().expect("nonempty");
        trace.pose_winding = ((last - s0) / (2.0 * PI)).round() as i64;
    }
    trace.vertex_windings = turns.iter().map(|t| (t / (2.0 * PI)).round() as i64).collect();
    Ok(trace)
}
