use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::newton::{newton_solve, NewtonOptions};
use super::system::initial_guess_round;
use super::{InscribeError, InscribedSolution};
use crate::polar::Pose;
use crate::simspace::SimilarityClass;
use crate::spheres::RadialEmbedding;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HomotopyOptions {
    /// Nominal number of steps from `t = 0` to `t = 1`.
    pub steps: usize,
    pub dt_min: f64,
    /// Largest angle any vertex may move in one accepted step.
    pub max_jump: f64,
    pub newton: NewtonOptions,
}

impl Default for HomotopyOptions {
    fn default() -> Self {
        Self { steps: 32, dt_min: 1e-4, max_jump: 0.1, newton: NewtonOptions::default() }
    }
}

/// Follows the round-sphere solution at pose `U` along `γ_t`,
/// `t = 0 → 1`. Each step predicts with the previous solution and corrects
/// with Newton; failed or jumping steps halve `Δt`.
pub fn sweep_homotopy(
    pose: &Pose,
    cls: &SimilarityClass,
    gamma: &RadialEmbedding,
    opts: &HomotopyOptions,
) -> Result<Vec<InscribedSolution>, InscribeError> {
    let start = gamma.isotopy(0.0)?;
    let first = newton_solve(&initial_guess_round(pose, cls), pose, cls, &start, &opts.newton)?;
    let nominal = 1.0 / opts.steps.max(1) as f64;
    let mut dt = nominal;
    let mut t = 0.0;
    let mut path = Vec::with_capacity(opts.steps + 1);
    path.push(first);
    while t < 1.0 {
        let t_next = if t + dt > 1.0 - 1e-12 { 1.0 } else { t + dt };
        let g = gamma.isotopy(t_next)?;
        let last = path.last().expect("nonempty");
        let attempt = newton_solve(&last.unknowns(), pose, cls, &g, &opts.newton);
        match attempt {
            Ok(sol) if sol.angular_distance(last) <= opts.max_jump => {
                path.push(sol);
                t = t_next;
                dt = (dt * 2.0).min(nominal);
            }
            _ => {
                dt *= 0.5;
                if dt < opts.dt_min {
                    return Err(InscribeError::Breakdown { last_t: t, condition: last.jacobian_condition });
                }
            }
        }
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simspace::{normalize_reference, SimplexConfig};
    use alloc::vec;

    fn scalene() -> SimilarityClass {
        normalize_reference(&SimplexConfig::new(vec![vec![0.0, 0.0], vec![4.0, 0.0], vec![0.0, 3.0]]).unwrap()).unwrap()
    }

    #[test]
    fn round_sweep_is_constant() {
        let cls = scalene();
        let pose = Pose::planar(0.8, 1);
        let path = sweep_homotopy(&pose, &cls, &RadialEmbedding::round(2), &HomotopyOptions::default()).unwrap();
        assert_eq!(path.last().unwrap().t, 1.0);
        for s in &path {
            assert!(s.distance(&path[0]) < 1e-12);
        }
    }

    #[test]
    fn ellipse_sweep_reaches_one() {
        let cls = scalene();
        let pose = Pose::planar(-0.3, -1);
        let g = RadialEmbedding::ellipse(1.2, 1.0).unwrap();
        let path = sweep_homotopy(&pose, &cls, &g, &HomotopyOptions::default()).unwrap();
        let end = path.last().unwrap();
        assert_eq!(end.t, 1.0);
        assert!(end.residual_norm < 1e-10);
    }
}
