use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::exec;
use super::newton::{newton_solve, NewtonOptions};
use super::system::{radial_seed, seed_from_points};
use super::{InscribeError, InscribedSolution};
use crate::simspace::SimilarityClass;
use crate::spheres::{RadialEmbedding, SpherePoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeededSolve {
    pub solution: InscribedSolution,
    /// Newton converged straight from the seed; otherwise the solution is
    /// the one nearest the seed among grid starts at the same pose.
    pub direct: bool,
    /// Largest angle between a solution point and its seed point.
    pub seed_deviation: f64,
}

fn deviation(sol: &InscribedSolution, seed: &[SpherePoint]) -> f64 {
    sol.u.iter().zip(seed).map(|(a, b)| a.angular_distance(b)).fold(0.0, f64::max)
}

/// Solves at the pose best fitting the seed points.
pub fn solve_from_points(
    cls: &SimilarityClass,
    gamma: &RadialEmbedding,
    seed: &[SpherePoint],
    opts: &NewtonOptions,
) -> Result<SeededSolve, InscribeError> {
    let (pose, x) = seed_from_points(cls, gamma, seed)?;
    let direct_err = match newton_solve(&x, &pose, cls, gamma, opts) {
        Ok(solution) => {
            let seed_deviation = deviation(&solution, seed);
            return Ok(SeededSolve { solution, direct: true, seed_deviation });
        }
        Err(e) => e,
    };
    let base = cls.base_edge();
    let mut starts: Vec<(SpherePoint, f64)> = Vec::new();
    let bases: Vec<SpherePoint> = match cls.dim() {
        2 => (0..48).map(|j| SpherePoint::from_angle(2.0 * PI * j as f64 / 48.0)).collect(),
        _ => (0..12)
            .flat_map(|i| {
                (0..24)
                    .map(move |j| SpherePoint::from_spherical(PI * (i as f64 + 0.5) / 12.0, 2.0 * PI * j as f64 / 24.0))
            })
            .collect(),
    };
    for u in seed.iter().chain(&bases) {
        for s in [0.3, 0.5, 0.7, 0.9] {
            starts.push((u.clone(), s * base));
        }
    }
    let found = exec::map(starts, |(u, lambda)| {
        radial_seed(cls, gamma, &pose, &u, lambda).and_then(|x| newton_solve(&x, &pose, cls, gamma, opts)).ok()
    });
    found
        .into_iter()
        .flatten()
        .map(|s| (deviation(&s, seed), s))
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal))
        .map(|(seed_deviation, solution)| SeededSolve { solution, direct: false, seed_deviation })
        .ok_or(direct_err)
}
