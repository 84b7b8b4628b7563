//! On-disk artifact schemas: solution, report and run-manifest JSON.
//!
//! Every schema carries a `schema_version` field. Program files are the one
//! exception: their four-key JSON layout is the language's interchange
//! format and adding keys would break it.
//!
//! Solution files contain no wall-clock fields, so a fixed (scene, config,
//! seed) triple produces byte-identical artifacts; timings live in the run
//! manifest, which is explicitly excluded from reproducibility comparisons.

use crate::eval::ScoreVector;
use crate::metrics::EvalReport;
use crate::render::Diagram;
use crate::scene::{Assignment, ParamKind, Scene};
use crate::solver::{SolveResult, SolverConfig};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentEntry {
    pub name: String,
    /// `[x, y]` for point parameters, `[v]` for scalars.
    pub values: Vec<f64>,
}

/// Deterministic subset of the solver telemetry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionTelemetry {
    pub outer_iterations: Vec<usize>,
    pub evaluations: u64,
    pub winning_restart: usize,
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub schema_version: u32,
    pub converged: bool,
    pub final_loss: f64,
    pub alpha: f64,
    pub seed: u64,
    pub assignment: Vec<AssignmentEntry>,
    pub points: BTreeMap<String, (f64, f64)>,
    pub diagram: Diagram,
    pub scores: ScoreVector,
    pub degenerate_points: Vec<String>,
    pub telemetry: SolutionTelemetry,
}

/// Build the solution artifact for a solve result.
pub fn solution_file(scene: &Scene, result: &SolveResult, seed: u64) -> SolutionFile {
    let assignment = scene
        .params
        .iter()
        .zip(&scene.slot_offsets)
        .map(|(param, &offset)| AssignmentEntry {
            name: param.name.clone(),
            values: result.assignment.values[offset..offset + param.slots()].to_vec(),
        })
        .collect();
    SolutionFile {
        schema_version: SCHEMA_VERSION,
        converged: result.converged,
        final_loss: result.final_loss,
        alpha: result.alpha,
        seed,
        assignment,
        points: result.point_coords(scene),
        diagram: crate::render::diagram_from_result(scene, result),
        scores: result.scores.clone(),
        degenerate_points: scene
            .point_names
            .iter()
            .zip(&result.degenerate)
            .filter(|(_, &d)| d)
            .map(|(n, _)| n.clone())
            .collect(),
        telemetry: SolutionTelemetry {
            outer_iterations: result.telemetry.outer_iterations.clone(),
            evaluations: result.telemetry.evaluations,
            winning_restart: result.telemetry.winning_restart,
            trace: result.telemetry.trace.clone(),
        },
    }
}

/// Rebuild an [`Assignment`] for `scene` from a solution file, matching
/// parameters by name.
pub fn assignment_from_solution(
    scene: &Scene,
    solution: &SolutionFile,
) -> Result<Assignment, String> {
    let mut values = vec![0.0; scene.n_slots];
    let by_name: BTreeMap<&str, &AssignmentEntry> = solution
        .assignment
        .iter()
        .map(|e| (e.name.as_str(), e))
        .collect();
    for (param, &offset) in scene.params.iter().zip(&scene.slot_offsets) {
        let entry = by_name
            .get(param.name.as_str())
            .ok_or_else(|| format!("solution lacks parameter '{}'", param.name))?;
        let expected = match param.kind {
            ParamKind::Point { .. } => 2,
            ParamKind::Scalar { .. } => 1,
        };
        if entry.values.len() != expected {
            return Err(format!(
                "parameter '{}' has {} value(s), expected {expected}",
                param.name,
                entry.values.len()
            ));
        }
        values[offset..offset + expected].copy_from_slice(&entry.values);
    }
    Ok(Assignment { values })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: u32,
    pub lci: Option<f64>,
    pub adi: Option<f64>,
    pub avg: Option<f64>,
    pub n_line: usize,
    pub n_angle: usize,
    pub per_constraint: ScoreVector,
    pub unsatisfied: Vec<crate::metrics::Unsatisfied>,
}

pub fn report_file(report: &EvalReport) -> ReportFile {
    ReportFile {
        schema_version: SCHEMA_VERSION,
        lci: report.lci,
        adi: report.adi,
        avg: report.avg,
        n_line: report.n_line,
        n_angle: report.n_angle,
        per_constraint: report.per_constraint.clone(),
        unsatisfied: report.unsatisfied.clone(),
    }
}

/// Echo of the solver configuration recorded in run manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub alpha: f64,
    pub inner_iterations: usize,
    pub outer_iterations: usize,
    pub restarts: usize,
    pub sigma_initial: f64,
    pub sigma_final: f64,
    pub seed: u64,
}

impl From<&SolverConfig> for ConfigEcho {
    fn from(c: &SolverConfig) -> ConfigEcho {
        ConfigEcho {
            alpha: c.alpha,
            inner_iterations: c.inner_iterations,
            outer_iterations: c.outer_iterations,
            restarts: c.restarts,
            sigma_initial: c.sigma_initial,
            sigma_final: c.sigma_final,
            seed: c.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub ms: u128,
    pub ok: bool,
}

/// Pipeline run record, written atomically at run end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub input: String,
    /// `"natural"` or `"program"`.
    pub mode: String,
    pub output_dir: String,
    pub config: ConfigEcho,
    pub stages: Vec<StageRecord>,
    pub exit_status: i32,
}

/// Pretty JSON bytes with a trailing newline (the canonical artifact form).
pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("artifact serializes");
    s.push('\n');
    s.into_bytes()
}

pub fn solution_from_json(bytes: &[u8]) -> Result<SolutionFile, String> {
    serde_json::from_slice(bytes).map_err(|e| format!("malformed solution file: {e}"))
}

pub fn report_from_json(bytes: &[u8]) -> Result<ReportFile, String> {
    serde_json::from_slice(bytes).map_err(|e| format!("malformed report file: {e}"))
}
