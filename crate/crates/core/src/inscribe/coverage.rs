use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::exec;
use super::homotopy::{sweep_homotopy, HomotopyOptions};
use super::InscribeError;
use crate::linalg::Mat;
use crate::polar::Pose;
use crate::simspace::SimilarityClass;
use crate::spheres::RadialEmbedding;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverageOptions {
    pub samples: usize,
    /// Also run every sample composed with `diag(1, 1, −1)`.
    pub include_reflections: bool,
    pub homotopy: HomotopyOptions,
}

impl Default for CoverageOptions {
    fn default() -> Self {
        Self { samples: 100, include_reflections: false, homotopy: HomotopyOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSample {
    pub index: usize,
    pub pose: Pose,
    pub success: bool,
    pub residual_norm: Option<f64>,
    pub jacobian_condition: Option<f64>,
    /// Last good isotopy time when continuation broke down.
    pub breakdown_t: Option<f64>,
    pub error: Option<String>,
    pub vertices: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub samples: usize,
    pub successes: usize,
    pub success_fraction: f64,
    pub outcomes: Vec<CoverageSample>,
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// The `i`-th rotation of a low-discrepancy sequence on `SO(3)`: Halton
/// points in bases 2, 3, 5 pushed through the uniform quaternion map.
pub fn halton_rotation(i: usize) -> Mat {
    let n = i as u64 + 1;
    let (u1, u2, u3) = (radical_inverse(n, 2), radical_inverse(n, 3), radical_inverse(n, 5));
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let (s2, c2) = (2.0 * PI * u2).sin_cos();
    let (s3, c3) = (2.0 * PI * u3).sin_cos();
    let (w, x, y, z) = (b * c3, a * s2, a * c2, b * s3);
    Mat::from_rows(&[
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ])
}

/// Runs the homotopy from the round sphere at quasi-uniformly spread poses
/// and reports which reach `t = 1`.
pub fn pose_coverage(
    cls: &SimilarityClass,
    gamma: &RadialEmbedding,
    opts: &CoverageOptions,
) -> Result<CoverageReport, InscribeError> {
    if cls.dim() != 3 || gamma.k != 3 {
        return Err(InscribeError::Dimension { expected: 3, got: cls.dim().max(gamma.k) });
    }
    let mut poses = Vec::new();
    for i in 0..opts.samples {
        let r = halton_rotation(i);
        if opts.include_reflections {
            poses.push(Pose { u: r.mul(&Mat::diag(&[1.0, 1.0, -1.0])), det_sign: -1 });
        }
        poses.push(Pose { u: r, det_sign: 1 });
    }
    let outcomes: Vec<CoverageSample> = exec::map(poses.into_iter().enumerate().collect(), |(index, pose)| {
        match sweep_homotopy(&pose, cls, gamma, &opts.homotopy) {
            Ok(path) => {
                let end = path.into_iter().last().expect("nonempty");
                CoverageSample {
                    index,
                    pose,
                    success: true,
                    residual_norm: Some(end.residual_norm),
                    jacobian_condition: Some(end.jacobian_condition),
                    breakdown_t: None,
                    error: None,
                    vertices: Some(end.vertices),
                }
            }
            Err(e) => {
                let (breakdown_t, cond) = match e {
                    InscribeError::Breakdown { last_t, condition } => (Some(last_t), Some(condition)),
                    _ => (None, None),
                };
                CoverageSample {
                    index,
                    pose,
                    success: false,
                    residual_norm: None,
                    jacobian_condition: cond,
                    breakdown_t,
                    error: Some(e.to_string()),
                    vertices: None,
                }
            }
        }
    });
    let successes = outcomes.iter().filter(|o| o.success).count();
    let samples = outcomes.len();
    Ok(CoverageReport {
        samples,
        successes,
        success_fraction: if samples == 0 { 0.0 } else { successes as f64 / samples as f64 },
        outcomes,
    })
}
