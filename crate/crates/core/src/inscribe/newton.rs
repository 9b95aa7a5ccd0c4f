use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::system::{jacobian, jacobian_fd, residual, Unknowns};
use super::{InscribeError, InscribedSolution};
use crate::linalg::{self, Lu, Mat};
use crate::polar::Pose;
use crate::simspace::{SimParams, SimilarityClass};
use crate::spheres::RadialEmbedding;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Converged once `‖F‖ < tol·(1 + ‖c‖ + λ)`.
    pub tol: f64,
    pub lambda_min: f64,
    /// Condition numbers above this mark the solution near-nontransverse.
    pub condition_warning: f64,
    /// Compare the analytic Jacobian with central differences at every
    /// iterate.
    pub check_jacobian: bool,
    pub fd_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iter: 50,
            tol: 1e-10,
            lambda_min: 1e-8,
            condition_warning: 1e10,
            check_jacobian: false,
            fd_step: 1e-6,
        }
    }
}

impl NewtonOptions {
    pub(crate) fn threshold(&self, x: &Unknowns) -> f64 {
        self.tol * (1.0 + linalg::norm(&x.center) + x.lambda)
    }
}

/// Largest `|a − b| / max(1, |a|)` over corresponding entries.
pub fn jacobian_discrepancy(analytic: &Mat, fd: &Mat) -> f64 {
    analytic.as_slice().iter().zip(fd.as_slice()).map(|(a, b)| (a - b).abs() / a.abs().max(1.0)).fold(0.0, f64::max)
}

/// Damped Newton iteration at a fixed pose, with a backtracking line search
/// on `‖F‖`.
pub fn newton_solve(
    x0: &Unknowns,
    pose: &Pose,
    cls: &SimilarityClass,
    gamma: &RadialEmbedding,
    opts: &NewtonOptions,
) -> Result<InscribedSolution, InscribeError> {
    let mut x = x0.clone();
    let mut f = residual(&x, pose, cls, gamma)?;
    let mut fnorm = linalg::norm(&f);
    let mut check: Option<f64> = None;
    let mut record_check = |x: &Unknowns, j: &Mat| -> Result<(), InscribeError> {
        let fd = jacobian_fd(x, pose, cls, gamma, opts.fd_step)?;
        let e = jacobian_discrepancy(j, &fd);
        check = Some(check.map_or(e, |c| c.max(e)));
        Ok(())
    };
    for iteration in 0..=opts.max_iter {
        let j = jacobian(&x, pose, cls, gamma)?;
        if opts.check_jacobian {
            record_check(&x, &j)?;
        }
        if fnorm < opts.threshold(&x) {
            return Ok(finish(x, pose, gamma, &j, fnorm, iteration, check, opts));
        }
        if iteration == opts.max_iter {
            break;
        }
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let delta = Lu::new(&j).solve(&rhs).ok_or(InscribeError::SingularJacobian { iteration })?;
        if delta.iter().any(|d| !d.is_finite()) {
            return Err(InscribeError::SingularJacobian { iteration });
        }
        let mut a = 1.0;
        loop {
            let trial = x.step_scaled(&delta, a);
            if trial.lambda > 0.0 {
                if let Ok(ft) = residual(&trial, pose, cls, gamma) {
                    let n = linalg::norm(&ft);
                    if n <= (1.0 - 1e-4 * a) * fnorm {
                        x = trial;
                        f = ft;
                        fnorm = n;
                        break;
                    }
                }
            }
            a *= 0.5;
            if a < 1e-10 {
                return Err(InscribeError::LineSearchStall { iteration, residual: fnorm });
            }
        }
        if x.lambda < opts.lambda_min {
            return Err(InscribeError::Collapse { lambda: x.lambda });
        }
    }
    Err(InscribeError::MaxIterations { iterations: opts.max_iter, residual: fnorm })
}

#[allow(clippy::too_many_arguments)]
fn finish(
    x: Unknowns,
    pose: &Pose,
    gamma: &RadialEmbedding,
    j: &Mat,
    fnorm: f64,
    iterations: usize,
    jacobian_check: Option<f64>,
    opts: &NewtonOptions,
) -> InscribedSolution {
    let cond = linalg::condition_number(j);
    let vertices = x.points.iter().map(|u| gamma.eval(u).expect("checked by residual")).collect();
    InscribedSolution {
        u: x.points,
        params: SimParams { pose: pose.clone(), lambda: x.lambda, center: x.center },
        vertices,
        residual_norm: fnorm,
        jacobian_condition: cond,
        t: gamma.t,
        iterations,
        near_nontransverse: !(cond <= opts.condition_warning),
        jacobian_check,
    }
}
