//! Simplices of a fixed similarity class inscribed in a radial sphere.
//!
//! At a prescribed pose `U` the unknowns are one exponential-chart offset
//! per vertex, the scale `λ` and the base point `c`. That is
//! `(k+1)(k−1) + 1 + k = k(k+1)` unknowns against `k(k+1)` equations, so
//! solutions are isolated and Newton's method applies directly. Families
//! appear once the pose is allowed to move.

mod coverage;
mod exec;
mod homotopy;
mod loops;
mod newton;
mod seeded;
mod system;
mod trace;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::simspace::{SimError, SimParams};
use crate::spheres::{SphereError, SpherePoint};

pub use coverage::{halton_rotation, pose_coverage, CoverageOptions, CoverageReport, CoverageSample};
pub use homotopy::{sweep_homotopy, HomotopyOptions};
pub use loops::{degree_sum, find_all_loops, LoopCensus, MultiStart, StartFailure};
pub use newton::{jacobian_discrepancy, newton_solve, NewtonOptions};
pub use seeded::{solve_from_points, SeededSolve};
pub use system::{
    initial_guess_round, jacobian, jacobian_fd, radial_seed, residual, seed_from_points, unknown_count, Unknowns,
};
pub use trace::{orientation_sign, trace_pose_loop, FamilyTrace, PosePath, TraceOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InscribeError {
    #[error("vertices {i} and {j} coincide, their charts are not independent")]
    ChartSingularity { i: usize, j: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },
    #[error("line search stalled at iteration {iteration} (residual {residual:e})")]
    LineSearchStall { iteration: usize, residual: f64 },
    #[error("singular Jacobian at iteration {iteration}")]
    SingularJacobian { iteration: usize },
    #[error("scale collapsed to {lambda:e}")]
    Collapse { lambda: f64 },
    #[error("continuation broke down after t = {last_t} (condition number {condition:e})")]
    Breakdown { last_t: f64, condition: f64 },
    #[error("pose tracing broke down at parameter {parameter} (condition number {condition:e})")]
    TraceBreakdown { parameter: f64, condition: f64 },
    #[error("trace {index} is not closed")]
    OpenTrace { index: usize },
    #[error("operation needs k = {expected}, got k = {got}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Sphere(#[from] SphereError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// A converged inscribed configuration at a fixed pose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InscribedSolution {
    /// Sphere points `u_0, …, u_k` with vertex `i` at `γ_t(u_i)`.
    pub u: Vec<SpherePoint>,
    pub params: SimParams,
    /// Vertex positions `γ_t(u_i)`.
    pub vertices: Vec<Vec<f64>>,
    pub residual_norm: f64,
    pub jacobian_condition: f64,
    pub t: f64,
    /// Newton steps taken.
    pub iterations: usize,
    /// Condition number above the warning threshold.
    pub near_nontransverse: bool,
    /// Largest analytic vs finite-difference Jacobian discrepancy seen, when
    /// checking was requested.
    pub jacobian_check: Option<f64>,
}

impl InscribedSolution {
    pub fn unknowns(&self) -> Unknowns {
        Unknowns { points: self.u.clone(), lambda: self.params.lambda, center: self.params.center.clone() }
    }

    /// Pairwise vertex distances, lexicographic in `(i, j)`, `i < j`.
    pub fn edge_lengths(&self) -> Vec<f64> {
        let n = self.vertices.len();
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                out.push(crate::linalg::distance(&self.vertices[i], &self.vertices[j]));
            }
        }
        out
    }

    /// Largest angle between corresponding sphere points.
    pub fn angular_distance(&self, other: &InscribedSolution) -> f64 {
        self.u.iter().zip(&other.u).map(|(a, b)| a.angular_distance(b)).fold(0.0, f64::max)
    }

    /// Max of vertex angular distance, scale difference and base point
    /// difference.
    pub fn distance(&self, other: &InscribedSolution) -> f64 {
        let dc = crate::linalg::max_abs_diff(&self.params.center, &other.params.center);
        self.angular_distance(other).max((self.params.lambda - other.params.lambda).abs()).max(dc)
    }
}
