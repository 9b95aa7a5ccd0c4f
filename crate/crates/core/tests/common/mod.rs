#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use simpose_core::linalg::Mat;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Determinant by permutation expansion.
pub fn leibniz_det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = 0.0;
    permute(&mut perm, 0, m, &mut total);
    total
}

fn permute(perm: &mut Vec<usize>, at: usize, m: &[Vec<f64>], total: &mut f64) {
    let n = perm.len();
    if at == n {
        let mut inversions = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                if perm[i] > perm[j] {
                    inversions += 1;
                }
            }
        }
        let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
        *total += sign * (0..n).map(|i| m[i][perm[i]]).product::<f64>();
        return;
    }
    for i in at..n {
        perm.swap(at, i);
        permute(perm, at + 1, m, total);
        perm.swap(at, i);
    }
}

/// Bordered matrix of squared distances.
pub fn cm_matrix(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut m = vec![vec![1.0; n + 1]; n + 1];
    m[0][0] = 0.0;
    for i in 0..n {
        for j in 0..n {
            m[i + 1][j + 1] = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum();
        }
    }
    m
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect()
}

/// Points whose simplex is comfortably non-degenerate.
pub fn random_simplex(rng: &mut ChaCha8Rng, k: usize) -> Vec<Vec<f64>> {
    loop {
        let p = random_points(rng, k + 1, k);
        let rows: Vec<Vec<f64>> = (1..=k).map(|i| (0..k).map(|a| p[i][a] - p[0][a]).collect()).collect();
        let vol = leibniz_det(&rows).abs();
        let diam = p.iter().flat_map(|a| p.iter().map(move |b| dist(a, b))).fold(0.0, f64::max);
        if vol > 0.05 * diam.powi(k as i32) {
            return p;
        }
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Circumcenter from `2(p_i − p_0)·x = |p_i|² − |p_0|²`.
pub fn circumcenter_oracle(p: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let k = p.len() - 1;
    let norm2 = |v: &Vec<f64>| v.iter().map(|x| x * x).sum::<f64>();
    let a = DMatrix::from_fn(k, k, |i, j| 2.0 * (p[i + 1][j] - p[0][j]));
    let b = DVector::from_fn(k, |i, _| norm2(&p[i + 1]) - norm2(&p[0]));
    let x = a.lu().solve(&b).expect("non-degenerate");
    let c: Vec<f64> = x.iter().copied().collect();
    let r = dist(&c, &p[0]);
    (c, r)
}

pub fn to_na(m: &Mat) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

pub fn from_na(m: &DMatrix<f64>) -> Mat {
    let rows: Vec<Vec<f64>> = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect();
    Mat::from_rows(&rows)
}

/// Polar factors through the SVD `A = W Σ Vᵀ`: `U = W Vᵀ`, `P = V Σ Vᵀ`.
pub fn polar_oracle(a: &Mat) -> (Mat, Mat) {
    let svd = to_na(a).svd(true, true);
    let (w, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let u = &w * &vt;
    let p = vt.transpose() * DMatrix::from_diagonal(&svd.singular_values) * &vt;
    (from_na(&u), from_na(&p))
}

/// Haar-ish random orthogonal matrix with the requested determinant sign.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, k: usize, det_sign: i8) -> Mat {
    let a = DMatrix::from_fn(k, k, |_, _| rng.gen_range(-1.0..1.0));
    let mut q = a.qr().q();
    if (q.determinant() > 0.0) != (det_sign > 0) {
        q.column_mut(k - 1).neg_mut();
    }
    from_na(&q)
}

/// Planar curve `θ ↦ r(θ)(cos θ, sin θ)` and a reference triangle
/// `Δ̂_0, Δ̂_1, Δ̂_2` (counterclockwise).
pub struct PlanarProblem<'a> {
    pub r: &'a dyn Fn(f64) -> f64,
    pub tri: [[f64; 2]; 3],
}

fn curve(r: &dyn Fn(f64) -> f64, t: f64) -> [f64; 2] {
    let rr = r(t);
    [rr * t.cos(), rr * t.sin()]
}

fn off_curve(r: &dyn Fn(f64) -> f64, q: [f64; 2]) -> f64 {
    q[0].hypot(q[1]) - r(q[1].atan2(q[0]))
}

fn cmul(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]]
}

fn cdiv(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    let n = b[0] * b[0] + b[1] * b[1];
    [(a[0] * b[0] + a[1] * b[1]) / n, (a[1] * b[0] - a[0] * b[1]) / n]
}

fn csub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

impl PlanarProblem<'_> {
    fn ratio(&self, i: usize) -> [f64; 2] {
        cdiv(csub(self.tri[i], self.tri[0]), csub(self.tri[1], self.tri[0]))
    }

    /// Number of connected components of the zero set of
    /// `(θ_0, θ_1) ↦ dist of q_2 from the curve`, away from the diagonal,
    /// where `q_0 = γ(θ_0)`, `q_1 = γ(θ_1)` and `q_2` completes the triangle.
    pub fn loop_count(&self, n: usize, band: f64) -> usize {
        let z = self.ratio(2);
        let h = 2.0 * PI / n as f64;
        let pts: Vec<[f64; 2]> = (0..n).map(|i| curve(self.r, i as f64 * h)).collect();
        let f = |i: usize, j: usize| {
            let (a, b) = (pts[i % n], pts[j % n]);
            off_curve(self.r, [a[0] + cmul(z, csub(b, a))[0], a[1] + cmul(z, csub(b, a))[1]])
        };
        let vals: Vec<f64> = (0..n * n).map(|c| f(c / n, c % n)).collect();
        let v = |i: usize, j: usize| vals[(i % n) * n + j % n];
        let near_diag = |i: usize, j: usize| {
            let d = ((j as f64 - i as f64) * h).rem_euclid(2.0 * PI);
            d.min(2.0 * PI - d) < band
        };
        let mut marked = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                if near_diag(i, j) || near_diag(i + 1, j + 1) || near_diag(i + 1, j) || near_diag(i, j + 1) {
                    continue;
                }
                let c = [v(i, j), v(i + 1, j), v(i, j + 1), v(i + 1, j + 1)];
                let pos = c.iter().any(|x| *x > 0.0);
                let neg = c.iter().any(|x| *x <= 0.0);
                marked[i * n + j] = pos && neg;
            }
        }
        let mut parent: Vec<usize> = (0..n * n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                p[r] = p[p[r]];
                r = p[r];
            }
            r
        }
        for i in 0..n {
            for j in 0..n {
                if !marked[i * n + j] {
                    continue;
                }
                for (di, dj) in [(1usize, 0usize), (0, 1), (1, 1), (1, n - 1)] {
                    let (a, b) = ((i + di) % n, (j + dj) % n);
                    if marked[a * n + b] {
                        let (x, y) = (find(&mut parent, i * n + j), find(&mut parent, a * n + b));
                        parent[x] = y;
                    }
                }
            }
        }
        let mut roots: Vec<usize> = (0..n * n).filter(|&c| marked[c]).map(|c| find(&mut parent, c)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }

    /// Vertices of the inscribed triangles with `q_1 − q_0` in direction
    /// `α` relative to `Δ̂_1 − Δ̂_0`: a grid over `(θ_0, λ)` followed by
    /// Newton polishing.
    pub fn solutions_at_pose(&self, alpha: f64, lambda_max: f64) -> Vec<[[f64; 2]; 3]> {
        let e = csub(self.tri[1], self.tri[0]);
        let base = e[1].atan2(e[0]);
        let dir = [(alpha + base).cos(), (alpha + base).sin()];
        let (w1, w2) = (cmul(dir, [1.0, 0.0]), cmul(dir, self.ratio(2)));
        let g = |t: f64, l: f64| {
            let q0 = curve(self.r, t);
            let q1 = [q0[0] + l * w1[0], q0[1] + l * w1[1]];
            let q2 = [q0[0] + l * w2[0], q0[1] + l * w2[1]];
            ([off_curve(self.r, q1), off_curve(self.r, q2)], [q0, q1, q2])
        };
        let (nt, nl) = (720, 300);
        let (ht, hl) = (2.0 * PI / nt as f64, lambda_max / nl as f64);
        let mut out: Vec<(f64, f64, [[f64; 2]; 3])> = Vec::new();
        for i in 0..nt {
            for j in 1..nl {
                let c: Vec<[f64; 2]> = [(0, 0), (1, 0), (0, 1), (1, 1)]
                    .iter()
                    .map(|(a, b)| g((i + a) as f64 * ht, (j + b) as f64 * hl).0)
                    .collect();
                let changes = |m: usize| c.iter().any(|x| x[m] > 0.0) && c.iter().any(|x| x[m] <= 0.0);
                if !(changes(0) && changes(1)) {
                    continue;
                }
                let (mut t, mut l) = ((i as f64 + 0.5) * ht, (j as f64 + 0.5) * hl);
                let mut ok = false;
                for _ in 0..30 {
                    let (f, _) = g(t, l);
                    if f[0].abs().max(f[1].abs()) < 1e-13 {
                        ok = true;
                        break;
                    }
                    let d = 1e-7;
                    let (ft, _) = g(t + d, l);
                    let (fl, _) = g(t, l + d);
                    let j00 = (ft[0] - f[0]) / d;
                    let j10 = (ft[1] - f[1]) / d;
                    let j01 = (fl[0] - f[0]) / d;
                    let j11 = (fl[1] - f[1]) / d;
                    let det = j00 * j11 - j01 * j10;
                    if det.abs() < 1e-14 {
                        break;
                    }
                    t -= (j11 * f[0] - j01 * f[1]) / det;
                    l -= (-j10 * f[0] + j00 * f[1]) / det;
                }
                if !ok || l <= 0.0 || l.is_nan() {
                    continue;
                }
                let t = t.rem_euclid(2.0 * PI);
                let dup = out.iter().any(|(a, b, _)| {
                    let dt = (a - t).abs();
                    dt.min(2.0 * PI - dt) < 1e-6 && (b - l).abs() < 1e-6
                });
                if !dup {
                    out.push((t, l, g(t, l).1));
                }
            }
        }
        out.into_iter().map(|(_, _, v)| v).collect()
    }
}

pub fn ellipse_radius(a: f64, b: f64) -> impl Fn(f64) -> f64 {
    move |t: f64| 1.0 / ((t.cos() / a).powi(2) + (t.sin() / b).powi(2)).sqrt()
}
