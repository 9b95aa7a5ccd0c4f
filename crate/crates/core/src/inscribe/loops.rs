use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::exec;
use super::homotopy::{sweep_homotopy, HomotopyOptions};
use super::newton::newton_solve;
use super::system::radial_seed;
use super::trace::{trace_pose_loop, FamilyTrace, PosePath, TraceOptions};
use super::{InscribeError, InscribedSolution};
use crate::simspace::SimilarityClass;
use crate::spheres::{RadialEmbedding, SpherePoint};

/// Starting points for the loop search at each pose of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultiStart {
    pub seed: u64,
    pub pose_samples: usize,
    /// Base-vertex angles of the deterministic seed grid.
    pub angle_seeds: usize,
    /// Seed scales as multiples of the round-circle scale.
    pub scale_seeds: Vec<f64>,
    pub random_restarts: usize,
    pub det_sign: i8,
    pub dedup_tol: f64,
    pub homotopy: HomotopyOptions,
    pub trace: TraceOptions,
}

impl Default for MultiStart {
    fn default() -> Self {
        Self {
            seed: 0,
            pose_samples: 6,
            angle_seeds: 24,
            scale_seeds: vec![0.35, 0.7, 1.0, 1.3],
            random_restarts: 24,
            det_sign: 1,
            dedup_tol: 1e-6,
            homotopy: HomotopyOptions::default(),
            trace: TraceOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartFailure {
    pub pose_parameter: f64,
    /// `homotopy`, `grid`, `random` or `trace`.
    pub start: String,
    pub index: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopCensus {
    pub seed: u64,
    pub loops: Vec<FamilyTrace>,
    pub pose_grid: Vec<f64>,
    /// Distinct solutions found by the starts at each grid pose.
    pub solutions_per_pose: Vec<usize>,
    /// Solutions of the traced loops at each grid pose.
    pub crossings_per_pose: Vec<usize>,
    pub failed_starts: Vec<StartFailure>,
}

struct PoseJob {
    s: f64,
    found: Vec<InscribedSolution>,
    failures: Vec<StartFailure>,
}

fn push_unique(found: &mut Vec<InscribedSolution>, sol: InscribedSolution, tol: f64) {
    if !found.iter().any(|f| f.distance(&sol) < tol) {
        found.push(sol);
    }
}

fn solve_pose(cls: &SimilarityClass, gamma: &RadialEmbedding, ms: &MultiStart, j: usize, s: f64) -> PoseJob {
    let path = PosePath::Planar { det_sign: ms.det_sign };
    let pose = path.pose(s);
    let newton = &ms.homotopy.newton;
    let mut job = PoseJob { s, found: Vec::new(), failures: Vec::new() };
    let fail = |start: &str, index: usize, e: InscribeError| StartFailure {
        pose_parameter: s,
        start: start.to_string(),
        index,
        error: e.to_string(),
    };
    match sweep_homotopy(&pose, cls, gamma, &ms.homotopy) {
        Ok(path) => push_unique(&mut job.found, path.into_iter().last().expect("nonempty"), ms.dedup_tol),
        Err(e) => job.failures.push(fail("homotopy", 0, e)),
    }
    let base = cls.base_edge();
    let mut seeds = Vec::new();
    for a in 0..ms.angle_seeds {
        for scale in &ms.scale_seeds {
            seeds.push(("grid", 2.0 * PI * a as f64 / ms.angle_seeds as f64, scale * base));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ms.seed ^ (j as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    for _ in 0..ms.random_restarts {
        seeds.push(("random", rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.2..1.5) * base));
    }
    for (index, (kind, theta, lambda)) in seeds.into_iter().enumerate() {
        let attempt = radial_seed(cls, gamma, &pose, &SpherePoint::from_angle(theta), lambda)
            .and_then(|x| newton_solve(&x, &pose, cls, gamma, newton));
        match attempt {
            Ok(sol) => push_unique(&mut job.found, sol, ms.dedup_tol),
            Err(e) => job.failures.push(fail(kind, index, e)),
        }
    }
    job
}

/// Finds the loops of inscribed triangles of a plane curve: solves at a
/// grid of poses from many starts, then traces a loop through every
/// solution not already lying on a traced loop.
pub fn find_all_loops(
    cls: &SimilarityClass,
    gamma: &RadialEmbedding,
    ms: &MultiStart,
) -> Result<LoopCensus, InscribeError> {
    if cls.dim() != 2 || gamma.k != 2 {
        return Err(InscribeError::Dimension { expected: 2, got: cls.dim().max(gamma.k) });
    }
    let n = ms.pose_samples.max(1);
    // offset so that no grid pose is a symmetry pose of the test shapes
    let grid: Vec<f64> = (0..n).map(|j| 2.0 * PI * (j as f64 + 0.371) / n as f64).collect();
    let jobs = exec::map(grid.iter().copied().enumerate().collect(), |(j, s)| solve_pose(cls, gamma, ms, j, s));

    let path = PosePath::Planar { det_sign: ms.det_sign };
    let newton = &ms.homotopy.newton;
    let mut census = LoopCensus {
        seed: ms.seed,
        loops: Vec::new(),
        pose_grid: grid.clone(),
        solutions_per_pose: jobs.iter().map(|j| j.found.len()).collect(),
        crossings_per_pose: vec![0; n],
        failed_starts: Vec::new(),
    };
    let mut crossings: Vec<Vec<Vec<InscribedSolution>>> = Vec::new();
    for job in &jobs {
        census.failed_starts.extend(job.failures.iter().cloned());
    }
    for (j, job) in jobs.iter().enumerate() {
        for (index, cand) in job.found.iter().enumerate() {
            let known = crossings.iter().any(|c| c[j].iter().any(|x| x.distance(cand) < ms.dedup_tol));
            if known {
                continue;
            }
            let trace = match trace_pose_loop(cls, gamma, &path, cand, job.s, &ms.trace) {
                Ok(t) => t,
                Err(e) => {
                    census.failed_starts.push(StartFailure {
                        pose_parameter: job.s,
                        start: "trace".to_string(),
                        index,
                        error: e.to_string(),
                    });
                    continue;
                }
            };
            let mut cross = exec::map(grid.clone(), |s| trace.crossings(s, cls, gamma, newton));
            if !cross[j].iter().any(|x| x.distance(cand) < ms.dedup_tol) {
                // the loop must pass through its own start
                cross[j].push(cand.clone());
            }
            let duplicate = crossings.iter().any(|c| {
                c.iter().zip(&cross).any(|(a, b)| a.iter().any(|x| b.iter().any(|y| x.distance(y) < ms.dedup_tol)))
            });
            if duplicate {
                continue;
            }
            crossings.push(cross);
            census.loops.push(trace);
        }
    }
    census.crossings_per_pose = (0..n).map(|j| crossings.iter().map(|c| c[j].len()).sum()).collect();
    Ok(census)
}

/// Sum of pose windings over closed planar loops.
pub fn degree_sum(traces: &[FamilyTrace]) -> Result<i64, InscribeError> {
    let mut sum = 0;
    for (index, t) in traces.iter().enumerate() {
        if t.path.dim() != 2 {
            return Err(InscribeError::Dimension { expected: 2, got: t.path.dim() });
        }
        if !t.closed {
            return Err(InscribeError::OpenTrace { index });
        }
        sum += t.pose_winding;
    }
    Ok(sum)
}
