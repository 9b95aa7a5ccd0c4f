//! Job configuration files.
//!
//! A config is a JSON object with a `task` and whatever that task needs.
//! Unknown keys are rejected everywhere. `docs/config.schema.json` describes
//! the same format for external tools.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use simpose_core::distgeo::{self, DistanceSet};
use simpose_core::inscribe::{HomotopyOptions, MultiStart, NewtonOptions, TraceOptions};
use simpose_core::linalg::Mat;
use simpose_core::polar::Pose;
use simpose_core::simspace::SimplexConfig;
use simpose_core::spheres::{RadialEmbedding, RadialShape, SpherePoint};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Cm,
    Find,
    Sweep,
    Trace,
    Degree,
    Coverage,
    Render,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub task: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simplex: Option<SimplexSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<EmbeddingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pose: Option<PoseSpec>,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
    /// Report to draw from, for `render`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SimplexSpec {
    /// `k + 1` points in `R^k`.
    Points(Vec<Vec<f64>>),
    Distances(DistanceSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistanceSpec {
    /// Lexicographic pairs `d01, d02, …, d12, …`.
    Pairs(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum EmbeddingSpec {
    Round {
        k: usize,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    Ellipsoid {
        a: f64,
        b: f64,
        c: f64,
    },
    TrigPoly {
        a0: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
    Expr {
        k: usize,
        expr: String,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseSpec {
    /// Planar rotation angle (`k = 2`), radians.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub det_sign: Option<i8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    /// Number of quasi-uniform poses, for `coverage`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default)]
    pub reflections: bool,
    /// Sphere points to seed from: `[θ]` for `k = 2`, `[φ, θ]` for `k = 3`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_points: Option<Vec<Vec<f64>>>,
    /// Rotation axis of the pose path for `trace` with `k = 3`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub newton: NewtonOptions,
    pub homotopy_steps: usize,
    pub dt_min: f64,
    pub max_jump: f64,
    pub trace_steps: usize,
    pub step_limit: usize,
    pub closure_tol: f64,
    pub pose_samples: usize,
    pub angle_seeds: usize,
    pub scale_seeds: Vec<f64>,
    pub random_restarts: usize,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let h = HomotopyOptions::default();
        let t = TraceOptions::default();
        let m = MultiStart::default();
        Self {
            newton: NewtonOptions::default(),
            homotopy_steps: h.steps,
            dt_min: h.dt_min,
            max_jump: h.max_jump,
            trace_steps: t.n_steps,
            step_limit: t.step_limit,
            closure_tol: t.closure_tol,
            pose_samples: m.pose_samples,
            angle_seeds: m.angle_seeds,
            scale_seeds: m.scale_seeds,
            random_restarts: m.random_restarts,
        }
    }
}

impl SolverSpec {
    pub fn homotopy(&self) -> HomotopyOptions {
        HomotopyOptions {
            steps: self.homotopy_steps,
            dt_min: self.dt_min,
            max_jump: self.max_jump,
            newton: self.newton.clone(),
        }
    }

    pub fn trace(&self) -> TraceOptions {
        TraceOptions {
            n_steps: self.trace_steps,
            step_limit: self.step_limit,
            max_jump: self.max_jump,
            closure_tol: self.closure_tol,
            newton: self.newton.clone(),
            ..TraceOptions::default()
        }
    }

    pub fn multistart(&self, seed: u64, det_sign: i8) -> MultiStart {
        MultiStart {
            seed,
            pose_samples: self.pose_samples,
            angle_seeds: self.angle_seeds,
            scale_seeds: self.scale_seeds.clone(),
            random_restarts: self.random_restarts,
            det_sign,
            homotopy: self.homotopy(),
            trace: self.trace(),
            ..MultiStart::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    /// File stem for the report, CSV and SVG; defaults to the task name.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Triangles drawn along the loop by `render`.
    pub frames: usize,
    pub csv: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: PathBuf::from("."), name: None, frames: 12, csv: true }
    }
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

impl JobConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: JobConfig = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        Self::from_json(&text)
    }

    pub fn stem(&self) -> String {
        self.output.name.clone().unwrap_or_else(|| {
            serde_json::to_value(self.task).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
        })
    }

    /// Checks everything that can be checked without solving.
    pub fn validate(&self) -> Result<(), CliError> {
        match self.task {
            Task::Cm => {
                self.distances()?;
            }
            Task::Render => {
                if self.report.is_none() {
                    return Err(schema("task `render` needs `report`"));
                }
            }
            _ => {
                let simplex = self.simplex_points()?;
                let k = simplex.k;
                let gamma = self.embedding()?;
                if gamma.k != k {
                    return Err(schema(format!("simplex has k = {k} but the embedding has k = {}", gamma.k)));
                }
                if !(2..=3).contains(&k) {
                    return Err(schema(format!("k = {k} is not supported, use 2 or 3")));
                }
                self.check_pose(k)?;
            }
        }
        Ok(())
    }

    fn check_pose(&self, k: usize) -> Result<(), CliError> {
        let pose = self.pose.clone().unwrap_or_default();
        let given = [pose.angle.is_some(), pose.matrix.is_some(), pose.seed_points.is_some()];
        if given.iter().filter(|g| **g).count() > 1 {
            return Err(schema("give at most one of `pose.angle`, `pose.matrix`, `pose.seed_points`"));
        }
        if pose.angle.is_some() && k != 2 {
            return Err(schema("`pose.angle` is only meaningful for k = 2"));
        }
        if let Some(s) = pose.det_sign {
            if s != 1 && s != -1 {
                return Err(schema("`pose.det_sign` must be 1 or -1"));
            }
        }
        if let Some(pts) = &pose.seed_points {
            if pts.len() != k + 1 || pts.iter().any(|p| p.len() != k - 1) {
                return Err(schema(format!("`pose.seed_points` needs {} entries of length {}", k + 1, k - 1)));
            }
        }
        match self.task {
            Task::Degree if k != 2 => return Err(schema("task `degree` needs k = 2")),
            Task::Coverage if k != 3 => return Err(schema("task `coverage` needs k = 3")),
            Task::Trace if k == 3 && pose.axis.is_none() => {
                return Err(schema("task `trace` with k = 3 needs `pose.axis`"))
            }
            _ => {}
        }
        self.base_pose(k)?;
        Ok(())
    }

    pub fn distances(&self) -> Result<DistanceSet, CliError> {
        match &self.simplex {
            Some(SimplexSpec::Distances(DistanceSpec::Pairs(p))) => {
                let n = (1..=12)
                    .find(|n| n * (n - 1) / 2 == p.len())
                    .ok_or_else(|| schema(format!("{} pair distances do not fit any point count", p.len())))?;
                DistanceSet::from_pairs(n, p).map_err(|e| schema(e.to_string()))
            }
            Some(SimplexSpec::Distances(DistanceSpec::Matrix(m))) => {
                DistanceSet::from_matrix(m).map_err(|e| schema(e.to_string()))
            }
            Some(SimplexSpec::Points(p)) => distgeo::distances_of(p).map_err(|e| schema(e.to_string())),
            None => Err(schema("missing `simplex`")),
        }
    }

    pub fn simplex_points(&self) -> Result<SimplexConfig, CliError> {
        let points = match &self.simplex {
            Some(SimplexSpec::Points(p)) => p.clone(),
            Some(SimplexSpec::Distances(_)) => {
                distgeo::realize(&self.distances()?).map_err(|e| schema(e.to_string()))?
            }
            None => return Err(schema("missing `simplex`")),
        };
        SimplexConfig::new(points).map_err(|e| schema(e.to_string()))
    }

    pub fn embedding(&self) -> Result<RadialEmbedding, CliError> {
        let (k, shape) = match self.embedding.clone().ok_or_else(|| schema("missing `embedding`"))? {
            EmbeddingSpec::Round { k } => (k, RadialShape::Round),
            EmbeddingSpec::Ellipse { a, b } => (2, RadialShape::Ellipse { a, b }),
            EmbeddingSpec::Ellipsoid { a, b, c } => (3, RadialShape::Ellipsoid { a, b, c }),
            EmbeddingSpec::TrigPoly { a0, cos, sin } => (2, RadialShape::TrigPoly { a0, cos, sin }),
            EmbeddingSpec::Expr { k, expr } => (k, RadialShape::expr(&expr).map_err(|e| schema(e.to_string()))?),
        };
        RadialEmbedding::new(k, shape).map_err(|e| schema(e.to_string()))
    }

    pub fn det_sign(&self) -> i8 {
        self.pose.as_ref().and_then(|p| p.det_sign).unwrap_or(1)
    }

    /// Pose from `angle` or `matrix`; identity (or its reflection) when
    /// neither is given.
    pub fn base_pose(&self, k: usize) -> Result<Pose, CliError> {
        let spec = self.pose.clone().unwrap_or_default();
        let sign = self.det_sign();
        if let Some(a) = spec.angle {
            return Ok(Pose::planar(a, sign));
        }
        if let Some(m) = spec.matrix {
            if m.len() != k || m.iter().any(|r| r.len() != k) {
                return Err(schema(format!("`pose.matrix` must be {k}×{k}")));
            }
            let pose = Pose::from_matrix(Mat::from_rows(&m)).map_err(|e| schema(e.to_string()))?;
            if spec.det_sign.is_some_and(|s| s != pose.det_sign) {
                return Err(schema("`pose.det_sign` disagrees with the sign of det(pose.matrix)"));
            }
            return Ok(pose);
        }
        let mut diag = vec![1.0; k];
        diag[k - 1] = sign as f64;
        Ok(Pose { u: Mat::diag(&diag), det_sign: sign })
    }

    pub fn seed_points(&self, k: usize) -> Option<Vec<SpherePoint>> {
        let pts = self.pose.as_ref()?.seed_points.as_ref()?;
        Some(
            pts.iter()
                .map(|p| if k == 2 { SpherePoint::from_angle(p[0]) } else { SpherePoint::from_spherical(p[0], p[1]) })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        let err = JobConfig::from_json(r#"{"task": "cm", "simplex": {"distances": [1, 1, 1]}, "colour": 3}"#);
        assert!(matches!(err, Err(CliError::Schema(_))));
        let err = JobConfig::from_json(
            r#"{"task": "find", "simplex": {"points": [[0,0],[1,0],[0,1]]},
                "embedding": {"family": "ellipse", "a": 1.2, "b": 1, "c": 2}}"#,
        );
        assert!(matches!(err, Err(CliError::Schema(_))));
    }

    #[test]
    fn distance_pairs_parse() {
        let cfg = JobConfig::from_json(r#"{"task": "cm", "simplex": {"distances": [1, 1, 1]}}"#).unwrap();
        assert_eq!(cfg.distances().unwrap().len(), 3);
        assert!(JobConfig::from_json(r#"{"task": "cm", "simplex": {"distances": [1, 1]}}"#).is_err());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let err = JobConfig::from_json(
            r#"{"task": "find", "simplex": {"points": [[0,0],[1,0],[0,1]]},
                "embedding": {"family": "round", "k": 3}}"#,
        );
        assert!(matches!(err, Err(CliError::Schema(m)) if m.contains("k = 2")));
    }

    #[test]
    fn pose_choices_are_exclusive() {
        let err = JobConfig::from_json(
            r#"{"task": "find", "simplex": {"points": [[0,0],[1,0],[0,1]]},
                "embedding": {"family": "round", "k": 2},
                "pose": {"angle": 0.3, "matrix": [[1,0],[0,1]]}}"#,
        );
        assert!(err.is_err());
    }

    #[test]
    fn solver_defaults_fill_in() {
        let cfg = JobConfig::from_json(
            r#"{"task": "sweep", "simplex": {"points": [[0,0],[1,0],[0,1]]},
                "embedding": {"family": "ellipse", "a": 1.2, "b": 1},
                "solver": {"homotopy_steps": 10, "newton": {"max_iter": 20}}}"#,
        )
        .unwrap();
        assert_eq!(cfg.solver.homotopy().steps, 10);
        assert_eq!(cfg.solver.newton.max_iter, 20);
        assert_eq!(cfg.solver.newton.tol, 1e-10);
    }
}
