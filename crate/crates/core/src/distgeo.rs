//! Distance geometry on labeled point sets: Cayley-Menger determinants,
//! constructibility, simplex volume and the circumsphere.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, Lu, Mat};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistGeoError {
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("distance table entry ({i},{j}) is invalid: {reason}")]
    InvalidDistance { i: usize, j: usize, reason: &'static str },
    #[error("distances are inconsistent: squared volume {vol2} is negative")]
    InconsistentDistances { vol2: f64 },
    #[error("simplex is degenerate")]
    DegenerateSimplex,
}

/// Pairwise distances of `n` labeled points. Stored as raw lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct DistanceSet {
    n: usize,
    d: Vec<f64>,
}

impl DistanceSet {
    /// Validates a full symmetric table with zero diagonal.
    pub fn from_matrix<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, DistGeoError> {
        let n = rows.len();
        if n < 2 {
            return Err(DistGeoError::InvalidArgument("need at least two points"));
        }
        let mut d = vec![0.0; n * n];
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(DistGeoError::InvalidArgument("distance table must be square"));
            }
            d[i * n..(i + 1) * n].copy_from_slice(row);
        }
        for i in 0..n {
            if d[i * n + i] != 0.0 {
                return Err(DistGeoError::InvalidDistance { i, j: i, reason: "diagonal must be zero" });
            }
            for j in (i + 1)..n {
                let (a, b) = (d[i * n + j], d[j * n + i]);
                if !a.is_finite() || a <= 0.0 {
                    return Err(DistGeoError::InvalidDistance { i, j, reason: "must be finite and positive" });
                }
                if (a - b).abs() > 1e-12 * a.max(b) {
                    return Err(DistGeoError::InvalidDistance { i, j, reason: "table is not symmetric" });
                }
                d[j * n + i] = a;
            }
        }
        Ok(Self { n, d })
    }

    /// Upper-triangle distances in lexicographic pair order
    /// `(0,1), (0,2), …, (0,n−1), (1,2), …`.
    pub fn from_pairs(n: usize, pairs: &[f64]) -> Result<Self, DistGeoError> {
        if n < 2 || pairs.len() != n * (n - 1) / 2 {
            return Err(DistGeoError::InvalidArgument("pair list length must be n(n-1)/2"));
        }
        let mut rows = vec![vec![0.0; n]; n];
        let mut it = pairs.iter();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = *it.next().expect("length checked");
                rows[i][j] = v;
                rows[j][i] = v;
            }
        }
        Self::from_matrix(&rows)
    }

    /// Triangle with `d01 = a`, `d02 = b`, `d12 = c`.
    pub fn triangle(a: f64, b: f64, c: f64) -> Result<Self, DistGeoError> {
        Self::from_pairs(3, &[a, b, c])
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Dimension `k` of the simplex these distances describe (`n − 1`).
    pub fn dim(&self) -> usize {
        self.n - 1
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn max_distance(&self) -> f64 {
        self.d.iter().fold(0.0, |m, x| m.max(*x))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.d.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// Relabels the points: entry `(i, j)` of the result is `d(σ(i), σ(j))`.
    pub fn permuted(&self, sigma: &[usize]) -> Self {
        assert_eq!(sigma.len(), self.n);
        let n = self.n;
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] = self.get(sigma[i], sigma[j]);
            }
        }
        Self { n, d }
    }

    /// Scale-aware zero threshold for a Cayley-Menger determinant over
    /// `h` points (it scales as length^(2(h−1))).
    fn cm_tolerance(&self, h: usize) -> f64 {
        1e-10 * self.max_distance().powi(2 * (h as i32 - 1))
    }
}

impl TryFrom<Vec<Vec<f64>>> for DistanceSet {
    type Error = DistGeoError;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self, Self::Error> {
        Self::from_matrix(&rows)
    }
}

impl From<DistanceSet> for Vec<Vec<f64>> {
    fn from(d: DistanceSet) -> Self {
        d.to_rows()
    }
}

/// Cayley-Menger determinant of the points indexed by `subset`.
pub fn cm_det(d: &DistanceSet, subset: &[usize]) -> Result<f64, DistGeoError> {
    if subset.len() < 2 {
        return Err(DistGeoError::InvalidArgument("subset needs at least two points"));
    }
    if subset.iter().any(|&i| i >= d.len()) {
        return Err(DistGeoError::InvalidArgument("subset index out of range"));
    }
    let h = subset.len();
    let mut m = Mat::zeros(h + 1, h + 1);
    for i in 1..=h {
        m[(0, i)] = 1.0;
        m[(i, 0)] = 1.0;
    }
    for (a, &i) in subset.iter().enumerate() {
        for (b, &j) in subset.iter().enumerate() {
            if a != b {
                let dij = d.get(i, j);
                m[(a + 1, b + 1)] = dij * dij;
            }
        }
    }
    Ok(Lu::new(&m).det())
}

/// Cayley-Menger determinant of the full point set.
pub fn cm_det_full(d: &DistanceSet) -> f64 {
    let all: Vec<usize> = (0..d.len()).collect();
    cm_det(d, &all).expect("full set has at least two points")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetRecord {
    pub subset: Vec<usize>,
    pub det: f64,
    /// `(−1)^h` for an `h`-point subset.
    pub expected_sign: i8,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructibilityReport {
    pub constructible: bool,
    pub records: Vec<SubsetRecord>,
}

impl ConstructibilityReport {
    pub fn failures(&self) -> impl Iterator<Item = &SubsetRecord> {
        self.records.iter().filter(|r| !r.ok)
    }
}

/// Checks that every subset of 2..=n points has a nonzero Cayley-Menger
/// determinant of sign `(−1)^h`. The full set is included so that flat
/// configurations are rejected.
pub fn is_constructible(d: &DistanceSet) -> ConstructibilityReport {
    let n = d.len();
    let mut records = Vec::new();
    for mask in 1u32..(1u32 << n) {
        let h = mask.count_ones() as usize;
        if h < 2 {
            continue;
        }
        let subset: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let det = cm_det(d, &subset).expect("valid subset");
        let expected_sign: i8 = if h % 2 == 0 { 1 } else { -1 };
        let ok = det.abs() > d.cm_tolerance(h) && det.signum() as i8 == expected_sign;
        records.push(SubsetRecord { subset, det, expected_sign, ok });
    }
    records.sort_by(|a, b| a.subset.len().cmp(&b.subset.len()).then_with(|| a.subset.cmp(&b.subset)));
    let constructible = records.iter().all(|r| r.ok);
    ConstructibilityReport { constructible, records }
}

/// `k!` and `2^k (k!)^2` as floats.
fn volume_normalizer(k: usize) -> f64 {
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    2f64.powi(k as i32) * fact * fact
}

/// k-volume of the simplex from its Cayley-Menger determinant.
pub fn simplex_volume(d: &DistanceSet) -> Result<f64, DistGeoError> {
    let k = d.dim();
    let sign = if (k + 1) % 2 == 0 { 1.0 } else { -1.0 };
    let vol2 = sign * cm_det_full(d) / volume_normalizer(k);
    let tol = d.cm_tolerance(k + 1) / volume_normalizer(k);
    if vol2 < -tol {
        return Err(DistGeoError::InconsistentDistances { vol2 });
    }
    Ok(vol2.max(0.0).sqrt())
}

pub fn heron_area(a: f64, b: f64, c: f64) -> Result<f64, DistGeoError> {
    if !(a > 0.0 && b > 0.0 && c > 0.0) {
        return Err(DistGeoError::InvalidArgument("side lengths must be positive"));
    }
    let p = (a + b + c) * (a + b - c) * (a - b + c) * (-a + b + c);
    Ok((p.max(0.0) / 16.0).sqrt())
}

/// Circumradius from `R² = −det(d_ij²) / (2·CM)`.
pub fn circumradius(d: &DistanceSet) -> Result<f64, DistGeoError> {
    let n = d.len();
    let cm = cm_det_full(d);
    if cm.abs() <= d.cm_tolerance(n) {
        return Err(DistGeoError::DegenerateSimplex);
    }
    let mut sq = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let dij = d.get(i, j);
            sq[(i, j)] = dij * dij;
        }
    }
    let r2 = -sq.det() / (2.0 * cm);
    if !(r2 > 0.0) {
        return Err(DistGeoError::DegenerateSimplex);
    }
    Ok(r2.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circumsphere {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Circumsphere of `k+1` points in `R^k` from the equidistance system
/// `2(p_i − p_0)·x = |p_i|² − |p_0|²`.
pub fn circumcenter<P: AsRef<[f64]>>(points: &[P]) -> Result<Circumsphere, DistGeoError> {
    let n = points.len();
    if n < 2 {
        return Err(DistGeoError::InvalidArgument("need at least two points"));
    }
    let k = points[0].as_ref().len();
    if n != k + 1 || points.iter().any(|p| p.as_ref().len() != k) {
        return Err(DistGeoError::InvalidArgument("need k+1 points in R^k"));
    }
    let p0 = points[0].as_ref();
    let mut a = Mat::zeros(k, k);
    let mut b = vec![0.0; k];
    let mut row_scale = 1.0;
    for i in 1..n {
        let pi = points[i].as_ref();
        let e = linalg::sub(pi, p0);
        for j in 0..k {
            a[(i - 1, j)] = 2.0 * e[j];
        }
        row_scale *= 2.0 * linalg::norm(&e);
        // |p_i|² − |p_0|² = (p_i − p_0)·(p_i + p_0)
        b[i - 1] = e.iter().zip(pi.iter().zip(p0)).map(|(ej, (x, y))| ej * (x + y)).sum();
    }
    let lu = Lu::new(&a);
    if lu.det().abs() <= 1e-12 * row_scale {
        return Err(DistGeoError::DegenerateSimplex);
    }
    let center = lu.solve(&b).ok_or(DistGeoError::DegenerateSimplex)?;
    let radius = linalg::distance(&center, p0);
    Ok(Circumsphere { center, radius })
}

/// Euclidean distance table of a point list.
pub fn distances_of<P: AsRef<[f64]>>(points: &[P]) -> Result<DistanceSet, DistGeoError> {
    let n = points.len();
    if n < 2 {
        return Err(DistGeoError::InvalidArgument("need at least two points"));
    }
    let dim = points[0].as_ref().len();
    if points.iter().any(|p| p.as_ref().len() != dim) {
        return Err(DistGeoError::InvalidArgument("points must share a dimension"));
    }
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = linalg::distance(points[i].as_ref(), points[j].as_ref());
            if dij == 0.0 {
                return Err(DistGeoError::InvalidArgument("coincident points"));
            }
            d[i * n + j] = dij;
            d[j * n + i] = dij;
        }
    }
    Ok(DistanceSet { n, d })
}

/// Coordinates in `R^{n−1}` realizing a constructible distance set, with
/// point 0 at the origin, from the Gram matrix
/// `G_ij = ½(d_0i² + d_0j² − d_ij²)`.
pub fn realize(d: &DistanceSet) -> Result<Vec<Vec<f64>>, DistGeoError> {
    let report = is_constructible(d);
    if !report.constructible {
        let vol2 = report.records.last().map(|r| r.det).unwrap_or(0.0);
        return Err(DistGeoError::InconsistentDistances { vol2 });
    }
    let m = d.len() - 1;
    let mut g = Mat::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let (a, b, c) = (d.get(0, i + 1), d.get(0, j + 1), d.get(i + 1, j + 1));
            g[(i, j)] = 0.5 * (a * a + b * b - c * c);
        }
    }
    let eig = linalg::SymEigen::new(&g);
    let mut points = vec![vec![0.0; m]];
    for i in 0..m {
        // coordinates in eigenvector order, largest spread first
        points.push((0..m).rev().map(|c| eig.vectors[(i, c)] * eig.values[c].max(0.0).sqrt()).collect());
    }
    Ok(points)
}
