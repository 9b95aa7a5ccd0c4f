//! Task dispatch and result persistence.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use simpose_core::distgeo;
use simpose_core::inscribe::{
    degree_sum, find_all_loops, initial_guess_round, newton_solve, orientation_sign, pose_coverage, solve_from_points,
    sweep_homotopy, trace_pose_loop, CoverageOptions, InscribeError, InscribedSolution, PosePath,
};
use simpose_core::polar::Pose;
use simpose_core::simspace::{normalize_reference, SimilarityClass};
use simpose_core::spheres::{RadialEmbedding, SpherePoint};

use crate::config::{JobConfig, Task};
use crate::{svg, CliError};

/// Suggested when a solve looks non-generic.
pub const PERTURBATION_HINT: &str = "the embedding may be non-generic here; add a small trig term to the radial \
function, e.g. \"+ 0.001*sin(2*theta + 0.7)\" (k = 2) or \"+ 0.001*sin(phi)^2*sin(2*theta + 0.7)\" (k = 3), and rerun";

/// Points on a planar curve stored in reports for later rendering.
const CURVE_SAMPLES: usize = 360;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub task: Task,
    pub seed: u64,
    pub status: Status,
    pub error: Option<String>,
    pub hint: Option<String>,
    pub config: JobConfig,
    pub result: Value,
}

/// A rectangular numeric table written as CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub table: Option<Table>,
    pub svg: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: Report,
    /// Files written, report first.
    pub files: Vec<PathBuf>,
}

struct TaskOutput {
    result: Value,
    error: Option<String>,
    hint: bool,
    artifacts: Artifacts,
}

impl TaskOutput {
    fn ok(result: Value, artifacts: Artifacts) -> Self {
        Self { result, error: None, hint: false, artifacts }
    }

    fn failed(result: Value, e: &InscribeError) -> Self {
        Self { result, error: Some(e.to_string()), hint: suggests_perturbation(e), artifacts: Artifacts::default() }
    }
}

fn suggests_perturbation(e: &InscribeError) -> bool {
    matches!(
        e,
        InscribeError::Breakdown { .. }
            | InscribeError::TraceBreakdown { .. }
            | InscribeError::SingularJacobian { .. }
            | InscribeError::LineSearchStall { .. }
    )
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// Runs the job without touching the disk, except that `render` reads its
/// source report.
pub fn execute(cfg: &JobConfig) -> Result<(Report, Artifacts), CliError> {
    cfg.validate()?;
    let out = match cfg.task {
        Task::Cm => task_cm(cfg)?,
        Task::Find => task_find(cfg)?,
        Task::Sweep => task_sweep(cfg)?,
        Task::Trace => task_trace(cfg)?,
        Task::Degree => task_degree(cfg)?,
        Task::Coverage => task_coverage(cfg)?,
        Task::Render => task_render(cfg)?,
    };
    let report = Report {
        task: cfg.task,
        seed: cfg.seed,
        status: if out.error.is_none() { Status::Ok } else { Status::Failed },
        error: out.error,
        hint: out.hint.then(|| PERTURBATION_HINT.to_string()),
        config: cfg.clone(),
        result: out.result,
    };
    Ok((report, out.artifacts))
}

/// Runs the job and writes `<name>.json`, plus `<name>.csv` and
/// `<name>.svg` when the task produces them.
pub fn run(cfg: &JobConfig) -> Result<RunOutcome, CliError> {
    let (report, artifacts) = execute(cfg)?;
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.clone(), e))?;
    let stem = cfg.stem();
    let mut files = Vec::new();

    let path = dir.join(format!("{stem}.json"));
    if let Some(src) = &cfg.report {
        if fs::canonicalize(src).ok() == fs::canonicalize(&path).ok() {
            return Err(CliError::Schema(format!("rendering would overwrite its source report {}", src.display())));
        }
    }
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| CliError::Io(path.clone(), e))?;
    files.push(path);

    if let (true, Some(table)) = (cfg.output.csv, &artifacts.table) {
        let path = dir.join(format!("{stem}.csv"));
        write_csv(&path, table)?;
        files.push(path);
    }
    if let Some(svg) = &artifacts.svg {
        let path = dir.join(format!("{stem}.svg"));
        fs::write(&path, svg).map_err(|e| CliError::Io(path.clone(), e))?;
        files.push(path);
    }
    Ok(RunOutcome { report, files })
}

fn write_csv(path: &Path, table: &Table) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    Ok(())
}

fn task_cm(cfg: &JobConfig) -> Result<TaskOutput, CliError> {
    let d = cfg.distances()?;
    let report = distgeo::is_constructible(&d);
    let volume = distgeo::simplex_volume(&d);
    let circumradius = distgeo::circumradius(&d);
    let heron = (d.len() == 3).then(|| distgeo::heron_area(d.get(0, 1), d.get(0, 2), d.get(1, 2)));
    let failed: Vec<&[usize]> = report.failures().map(|r| r.subset.as_slice()).collect();
    let result = json!({
        "points": d.len(),
        "dim": d.dim(),
        "distances": d.to_rows(),
        "cm_det": distgeo::cm_det_full(&d),
        "constructible": report.constructible,
        "failed_subsets": failed,
        "subsets": report.records,
        "volume": volume.as_ref().ok(),
        "volume_error": volume.as_ref().err().map(|e| e.to_string()),
        "circumradius": circumradius.as_ref().ok(),
        "circumradius_error": circumradius.as_ref().err().map(|e| e.to_string()),
        "heron_area": heron.and_then(|h| h.ok()),
    });
    Ok(TaskOutput::ok(result, Artifacts::default()))
}

struct Setup {
    k: usize,
    cls: SimilarityClass,
    gamma: RadialEmbedding,
    pose: Pose,
}

fn setup(cfg: &JobConfig) -> Result<Setup, CliError> {
    let simplex = cfg.simplex_points()?;
    let k = simplex.k;
    let cls = normalize_reference(&simplex).map_err(|e| CliError::Schema(format!("simplex: {e}")))?;
    Ok(Setup { k, cls, gamma: cfg.embedding()?, pose: cfg.base_pose(k)? })
}

/// `[θ]` on the circle, `[φ, θ]` on `S²`, with `θ ∈ [0, 2π)`.
fn coordinates(u: &SpherePoint) -> Vec<f64> {
    let wrap = |t: f64| if t < 0.0 { t + 2.0 * PI } else { t };
    if u.dim() == 2 {
        vec![wrap(u.angle())]
    } else {
        let (phi, theta) = u.spherical();
        vec![phi, wrap(theta)]
    }
}

fn solution_summary(sol: &InscribedSolution) -> Value {
    let edges = sol.edge_lengths();
    let mean = edges.iter().sum::<f64>() / edges.len() as f64;
    let (lo, hi) = edges.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    json!({
        "coordinates": sol.u.iter().map(coordinates).collect::<Vec<_>>(),
        "edge_lengths": edges,
        "mean_edge": mean,
        "edge_spread": (hi - lo) / mean,
    })
}

fn vertex_table(sol: &InscribedSolution) -> Table {
    let k = sol.vertices[0].len();
    let mut header = vec!["vertex".to_string()];
    header.extend(if k == 2 { vec!["theta".into()] } else { vec!["phi".into(), "theta".into()] });
    header.extend(["x", "y", "z"].iter().take(k).map(|s| s.to_string()));
    let rows = sol
        .u
        .iter()
        .zip(&sol.vertices)
        .enumerate()
        .map(|(i, (u, v))| {
            let mut row = vec![i as f64];
            row.extend(coordinates(u));
            row.extend(v);
            row
        })
        .collect();
    Table { header, rows }
}

fn trajectory_table(first: &str, k: usize, rows: impl Iterator<Item = (Vec<f64>, Vec<f64>)>, prefix: &[&str]) -> Table {
    let mut header: Vec<String> = prefix.iter().map(|s| s.to_string()).collect();
    header.push(first.to_string());
    for i in 0..=k {
        for axis in ["x", "y", "z"].iter().take(k) {
            header.push(format!("{axis}{i}"));
        }
    }
    let rows = rows
        .map(|(mut lead, verts)| {
            lead.extend(verts);
            lead
        })
        .collect();
    Table { header, rows }
}

fn flat(sol: &InscribedSolution) -> Vec<f64> {
    sol.vertices.iter().flatten().copied().collect()
}

/// Direct Newton from the round guess, then the homotopy.
fn solve_at_pose(s: &Setup, cfg: &JobConfig) -> Result<(InscribedSolution, &'static str), InscribeError> {
    let newton = &cfg.solver.newton;
    match newton_solve(&initial_guess_round(&s.pose, &s.cls), &s.pose, &s.cls, &s.gamma, newton) {
        Ok(sol) => Ok((sol, "direct")),
        Err(_) => sweep_homotopy(&s.pose, &s.cls, &s.gamma, &cfg.solver.homotopy())
            .map(|path| (path.into_iter().last().expect("nonempty"), "homotopy")),
    }
}

fn task_find(cfg: &JobConfig) -> Result<TaskOutput, CliError> {
    let s = setup(cfg)?;
    let found = match cfg.seed_points(s.k) {
        Some(seed) => solve_from_points(&s.cls, &s.gamma, &seed, &cfg.solver.newton).map(|r| {
            let method = if r.direct { "seeded" } else { "seeded_grid" };
            (r.solution, method, Some(r.seed_deviation))
        }),
        None => solve_at_pose(&s, cfg).map(|(sol, m)| (sol, m, None)),
    };
    Ok(match found {
        Ok((sol, method, seed_deviation)) => {
            let mut result = solution_summary(&sol);
            result["method"] = json!(method);
            result["seed_deviation"] = json!(seed_deviation);
            result["solution"] = to_value(&sol);
            let hint = sol.near_nontransverse;
            let mut out = TaskOutput::ok(result, Artifacts { table: Some(vertex_table(&sol)), svg: None });
            out.hint = hint;
            out
        }
        Err(e) => TaskOutput::failed(json!({}), &e),
    })
}

fn task_sweep(cfg: &JobConfig) -> Result<TaskOutput, CliError> {
    let s = setup(cfg)?;
    Ok(match sweep_homotopy(&s.pose, &s.cls, &s.gamma, &cfg.solver.homotopy()) {
        Ok(path) => {
            let last = path.last().expect("nonempty");
            let mut result = solution_summary(last);
            result["steps"] = json!(path.len());
            let hint = path.iter().any(|p| p.near_nontransverse);
            let table = trajectory_table("t", s.k, path.iter().map(|p| (vec![p.t], flat(p))), &[]);
            result["path"] = to_value(&path);
            let mut out = TaskOutput::ok(result, Artifacts { table: Some(table), svg: None });
            out.hint = hint;
            out
        }
        Err(e) => TaskOutput::failed(json!({}), &e),
    })
}

fn curve_samples(gamma: &RadialEmbedding) -> Vec<Vec<f64>> {
    (0..CURVE_SAMPLES)
        .filter_map(|j| gamma.eval(&SpherePoint::from_angle(2.0 * PI * j as f64 / CURVE_SAMPLES as f64)).ok())
        .collect()
}

fn task_trace(cfg: &JobConfig) -> Result<TaskOutput, CliError> {
    let s = setup(cfg)?;
    let (path, s0) = match s.k {
        2 => (PosePath::Planar { det_sign: s.pose.det_sign }, s.pose.planar_angle()),
        _ => {
            let axis = cfg.pose.as_ref().and_then(|p| p.axis).expect("validated");
            (PosePath::Axis { axis, base: s.pose.clone() }, 0.0)
        }
    };
    let curve = (s.k == 2).then(|| curve_samples(&s.gamma));
    let start = match solve_at_pose(&s, cfg) {
        Ok((sol, _)) => sol,
        Err(e) => return Ok(TaskOutput::failed(json!({ "curve": curve }), &e)),
    };
    let orientation = orientation_sign(&s.cls, &path, s0).ok();
    Ok(match trace_pose_loop(&s.cls, &s.gamma, &path, &start, s0, &cfg.solver.trace()) {
        Ok(trace) => {
            let rows = trace.parameters.iter().zip(&trace.solutions).map(|(p, sol)| (vec![*p], flat(sol)));
            let table = trajectory_table("s", s.k, rows, &[]);
            let hint = trace.solutions.iter().any(|p| p.near_nontransverse);
            let result = json!({
                "closed": trace.closed,
                "pose_winding": trace.pose_winding,
                "vertex_windings": trace.vertex_windings,
                "orientation_sign": orientation,
                "curve": curve,
                "trace": trace,
            });
            let error = (!trace.closed).then(|| InscribeError::OpenTrace { index: 0 }.to_string());
            TaskOutput { result, error, hint, artifacts: Artifacts { table: Some(table), svg: None } }
        }
        Err(e) => TaskOutput::failed(json!({ "curve": curve, "start": start }), &e),
    })
}

fn task_degree(cfg: &JobConfig) -> Result<TaskOutput, CliError> {
    let s = setup(cfg)?;
    let ms = cfg.solver.multistart(cfg.seed, s.pose.det_sign);
    let curve = curve_samples(&s.gamma);
    let census = match find_all_loops(&s.cls, &s.gamma, &ms) {
        Ok(c) => c,
        Err(e) => return Ok(TaskOutput::failed(json!({ "curve": curve }), &e)),
    };
    let sum = degree_sum(&census.loops);
    let mut rows = Vec::new();
    for (l, trace) in census.loops.iter().enumerate() {
        for (p, sol) in trace.parameters.iter().zip(&trace.solutions) {
            rows.push((vec![l as f64, *p], flat(sol)));
        }
    }
    let table = trajectory_table("s", 2, rows.into_iter(), &["loop"]);
    let hint = census.loops.iter().flat_map(|t| &t.solutions).any(|p| p.near_nontransverse);
    let result = json!({
        "degree_sum": sum.as_ref().ok(),
        "loop_count": census.loops.len(),
        "pose_windings": census.loops.iter().map(|t| t.pose_winding).collect::<Vec<_>>(),
        "vertex_windings": census.loops.iter().map(|t| t.vertex_windings.clone()).collect::<Vec<_>>(),
        "failed_start_count": census.failed_starts.len(),
        "curve": curve,
        "census": census,
    });
    let artifacts = Artifacts { table: Some(table), svg: None };
    Ok(match sum {
        Ok(_) => TaskOutput { result, error: None, hint, artifacts },
        Err(e) => TaskOutput { result, error: Some(e.to_string()), hint: true, artifacts },
    })
}

fn task_coverage(cfg: &JobConfig) -> Result<TaskOutput, CliError> {
    let s = setup(cfg)?;
    let pose = cfg.pose.clone().unwrap_or_default();
    let opts = CoverageOptions {
        samples: pose.samples.unwrap_or(CoverageOptions::default().samples),
        include_reflections: pose.reflections,
        homotopy: cfg.solver.homotopy(),
    };
    Ok(match pose_coverage(&s.cls, &s.gamma, &opts) {
        Ok(report) => {
            let nan = f64::NAN;
            let rows = report
                .outcomes
                .iter()
                .map(|o| {
                    vec![
                        o.index as f64,
                        o.pose.det_sign as f64,
                        if o.success { 1.0 } else { 0.0 },
                        o.residual_norm.unwrap_or(nan),
                        o.jacobian_condition.unwrap_or(nan),
                        o.breakdown_t.unwrap_or(nan),
                    ]
                })
                .collect();
            let header = ["index", "det_sign", "success", "residual_norm", "jacobian_condition", "breakdown_t"];
            let table = Table { header: header.iter().map(|h| h.to_string()).collect(), rows };
            let hint = report.successes < report.samples;
            let mut out = TaskOutput::ok(to_value(&report), Artifacts { table: Some(table), svg: None });
            out.hint = hint;
            out
        }
        Err(e) => TaskOutput::failed(json!({}), &e),
    })
}

fn report_error(path: &Path, msg: impl Into<String>) -> CliError {
    CliError::Report(path.to_path_buf(), msg.into())
}

fn points(v: &Value) -> Option<Vec<Vec<f64>>> {
    v.as_array()?.iter().map(|p| p.as_array()?.iter().map(Value::as_f64).collect()).collect()
}

fn task_render(cfg: &JobConfig) -> Result<TaskOutput, CliError> {
    let path = cfg.report.clone().expect("validated");
    let text = fs::read_to_string(&path).map_err(|e| CliError::Io(path.clone(), e))?;
    let source: Value = serde_json::from_str(&text).map_err(|e| report_error(&path, e.to_string()))?;
    let result = &source["result"];
    let curve = points(&result["curve"]).ok_or_else(|| report_error(&path, "no planar `curve` to draw"))?;
    let trace = match source["task"].as_str() {
        Some("degree") => &result["census"]["loops"][0],
        Some("trace") => &result["trace"],
        other => return Err(report_error(&path, format!("cannot render a `{}` report", other.unwrap_or("?")))),
    };
    let loop_triangles = trace["solutions"]
        .as_array()
        .ok_or_else(|| report_error(&path, "no traced loop"))?
        .iter()
        .map(|s| points(&s["vertices"]))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| report_error(&path, "malformed vertices"))?;
    if curve.iter().chain(loop_triangles.iter().flatten()).any(|p| p.len() != 2) {
        return Err(report_error(&path, "only planar reports can be rendered"));
    }
    let frames = cfg.output.frames;
    let picture = svg::render(&curve, &loop_triangles, frames);
    let result = json!({
        "source": path,
        "frames": frames.min(loop_triangles.len()),
        "loop_points": loop_triangles.len(),
    });
    Ok(TaskOutput::ok(result, Artifacts { table: None, svg: Some(picture) }))
}
