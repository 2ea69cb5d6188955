//! Mode execution, output files and exit status.

use crate::config::{fallback_out_dir, load_config, ConfigError, Mode, Overrides, RunConfig};
use crate::fields;
use nanoflux_core::driver::{continuation, picard_solve, IterationRecord, WeakResidual};
use nanoflux_core::grid::AdvectionScheme;
use nanoflux_core::subproblems::{Context, SolverState};
use nanoflux_core::verify::{convergence_study, invariant_suite, InvariantReport, StudyResult};
use nanoflux_core::{Error, ModelParams, UniformGrid};
use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

/// Failure classes and their exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    ConfigError,
    SolverError,
    InvariantFailure,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::ConfigError => 2,
            Status::SolverError => 3,
            Status::InvariantFailure => 4,
        }
    }
}

/// Failure class of a solver-side error: bad inputs count as configuration
/// errors.
fn classify(e: &Error) -> Status {
    match e.root() {
        Error::InvalidGrid(_)
        | Error::InvalidEpsilon { .. }
        | Error::KernelTooNarrow { .. }
        | Error::InvalidParameter(_)
        | Error::BoundaryOutOfRange { .. }
        | Error::Shape(_)
        | Error::Precondition(_) => Status::ConfigError,
        _ => Status::SolverError,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelSummary {
    pub epsilon: f64,
    pub converged: bool,
    pub iterations: usize,
    pub change: f64,
    pub weak_residual: WeakResidual,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub epsilon: f64,
    pub dir: PathBuf,
    pub converged: bool,
    pub iterations: usize,
    pub change: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Final record of a run, written as `summary.json` on every path.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub mode: &'static str,
    pub status: Status,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub threads: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    /// Last regularization level reached.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<LevelSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aborted_at: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariants: Option<InvariantReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub study: Option<StudyResult>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepEntry>,
}

impl Summary {
    fn new(mode: Mode) -> Self {
        Self {
            mode: mode.name(),
            status: Status::Ok,
            exit_code: 0,
            error: None,
            threads: nanoflux_core::par::current_threads(),
            scheme: None,
            converged: None,
            epsilon: None,
            levels: Vec::new(),
            aborted_at: None,
            invariants: None,
            study: None,
            sweep: Vec::new(),
        }
    }

    fn fail(&mut self, status: Status, message: String) {
        // the first failure decides the class
        if self.status == Status::Ok {
            self.status = status;
        }
        self.error.get_or_insert(message);
    }
}

/// One diagnostics line: the level index plus the iteration record.
#[derive(Serialize)]
struct DiagnosticsLine<'a> {
    level: usize,
    #[serde(flatten)]
    record: &'a IterationRecord,
}

fn write_diagnostics(path: &Path, levels: &[&[IterationRecord]]) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for (level, records) in levels.iter().enumerate() {
        for record in records.iter() {
            serde_json::to_writer(&mut out, &DiagnosticsLine { level, record })?;
            out.write_all(b"\n")?;
        }
    }
    out.flush()
}

fn write_state(dir: &Path, grid: &UniformGrid, state: &SolverState, vtk: bool) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    fields::write_cells(&dir.join("phi.csv"), grid, "phi", state.phi.values())?;
    fields::write_cells(&dir.join("temperature.csv"), grid, "temperature", state.temperature.values())?;
    fields::write_cells(&dir.join("pressure.csv"), grid, "pressure", state.pressure.values())?;
    fields::write_cell_velocity(&dir.join("velocity.csv"), grid, &state.velocity)?;
    fields::write_faces(&dir.join("velocity_faces.csv"), grid, &state.velocity)?;
    if vtk {
        fields::write_vtk(
            &dir.join("fields.vtk"),
            grid,
            &[("phi", &state.phi), ("temperature", &state.temperature), ("pressure", &state.pressure)],
            &state.velocity,
        )?;
    }
    Ok(())
}

fn context(cfg: &RunConfig, grid: &UniformGrid, epsilon: f64) -> nanoflux_core::Result<Context> {
    let mut ctx = Context::new(grid, epsilon)?.with_scheme(cfg.scheme);
    ctx.temperature_extension = cfg.temperature_extension;
    ctx.bound_tol = cfg.picard.bound_tol;
    Ok(ctx)
}

fn scheme_name(s: AdvectionScheme) -> &'static str {
    match s {
        AdvectionScheme::Centered => "centered",
        AdvectionScheme::Upwind => "upwind",
    }
}

/// Continuation over the configured schedule; fields and diagnostics go to
/// the output directory. With `check`, the invariant suite decides the exit
/// status.
fn run_solve(cfg: &RunConfig, summary: &mut Summary, check: bool) -> Result<(), (Status, String)> {
    let grid = cfg.grid.expect("grid validated");
    let params: &ModelParams = cfg.params.as_ref().expect("params validated");
    let schedule = cfg.schedule.expect("schedule validated");
    let solver = |e: Error| (classify(&e), e.to_string());
    summary.scheme = Some(scheme_name(cfg.scheme));
    let ctx = context(cfg, &grid, schedule.eps0).map_err(solver)?;
    let initial = SolverState::initial(&grid, params, schedule.eps0).map_err(solver)?;
    let outcome = continuation(&ctx, initial, params, &schedule, &cfg.picard).map_err(solver)?;

    let histories: Vec<&[IterationRecord]> = outcome.levels.iter().map(|l| l.state.diagnostics.as_slice()).collect();
    let io = |e: std::io::Error| (Status::SolverError, format!("writing output: {e}"));
    write_diagnostics(&cfg.out_dir.join("diagnostics.jsonl"), &histories).map_err(io)?;
    summary.levels = outcome
        .levels
        .iter()
        .map(|l| LevelSummary {
            epsilon: l.epsilon,
            converged: l.converged,
            iterations: l.iterations,
            change: l.change,
            weak_residual: l.weak_residual,
        })
        .collect();
    summary.aborted_at = outcome.aborted_at;
    let last = outcome.final_level().expect("at least one level");
    summary.epsilon = Some(last.epsilon);
    let converged = outcome.aborted_at.is_none() && last.converged;
    summary.converged = Some(converged);
    write_state(&cfg.out_dir, &grid, &last.state, cfg.vtk).map_err(io)?;

    let report = invariant_suite(&context(cfg, &grid, last.epsilon).map_err(solver)?, &last.state, params);
    let failures = report.failures().join(", ");
    let passed = report.passed();
    summary.invariants = Some(report);
    if !converged {
        return Err((
            Status::SolverError,
            match outcome.aborted_at {
                Some(e) => format!("continuation aborted at epsilon = {e}"),
                None => format!(
                    "Picard iteration did not converge at epsilon = {}: change {:e} after {} iterations",
                    last.epsilon, last.change, last.iterations
                ),
            },
        ));
    }
    if check && !passed {
        return Err((Status::InvariantFailure, format!("invariants failed: {failures}")));
    }
    Ok(())
}

fn run_mms(cfg: &RunConfig, summary: &mut Summary) -> Result<(), (Status, String)> {
    let plan = cfg.mms.as_ref().expect("mms validated");
    let result = convergence_study(&plan.study).map_err(|e| (classify(&e), e.to_string()))?;
    let io = |e: std::io::Error| (Status::SolverError, format!("writing output: {e}"));
    let mut out = BufWriter::new(File::create(cfg.out_dir.join("study.jsonl")).map_err(io)?);
    for level in &result.levels {
        serde_json::to_writer(&mut out, level).map_err(|e| io(e.into()))?;
        out.write_all(b"\n").map_err(io)?;
    }
    out.flush().map_err(io)?;
    let lowest = result.orders.min_primary();
    summary.study = Some(result);
    match (plan.min_order, lowest) {
        (Some(required), Some(order)) if order < required => Err((
            Status::InvariantFailure,
            format!("observed order {order:.3} below the required {required}"),
        )),
        _ => Ok(()),
    }
}

/// Independent single-level solves, one directory per `epsilon`, run
/// concurrently.
fn run_sweep(cfg: &RunConfig, summary: &mut Summary) -> Result<(), (Status, String)> {
    use rayon::prelude::*;
    let grid = cfg.grid.expect("grid validated");
    let params = cfg.params.as_ref().expect("params validated");
    summary.scheme = Some(scheme_name(cfg.scheme));
    let entries: Vec<SweepEntry> = cfg
        .sweep
        .par_iter()
        .map(|&epsilon| {
            let dir = cfg.out_dir.join(format!("eps_{epsilon}"));
            let mut entry = SweepEntry {
                epsilon,
                dir: dir.clone(),
                converged: false,
                iterations: 0,
                change: f64::NAN,
                error: None,
            };
            let result = context(cfg, &grid, epsilon)
                .and_then(|ctx| {
                    let initial = SolverState::initial(&grid, params, epsilon)?;
                    picard_solve(&ctx, initial, params, &cfg.picard)
                })
                .map_err(|e| e.to_string())
                .and_then(|out| {
                    write_state(&dir, &grid, &out.state, cfg.vtk)
                        .and_then(|_| write_diagnostics(&dir.join("diagnostics.jsonl"), &[&out.history]))
                        .map_err(|e| format!("writing output: {e}"))?;
                    Ok(out)
                });
            match result {
                Ok(out) => {
                    entry.converged = out.converged;
                    entry.iterations = out.iterations;
                    entry.change = out.change;
                }
                Err(e) => entry.error = Some(e),
            }
            entry
        })
        .collect();
    let failed: Vec<String> = entries
        .iter()
        .filter(|e| !e.converged)
        .map(|e| format!("{}", e.epsilon))
        .collect();
    summary.converged = Some(failed.is_empty());
    summary.sweep = entries;
    if failed.is_empty() {
        Ok(())
    } else {
        Err((Status::SolverError, format!("no convergence at epsilon {}", failed.join(", "))))
    }
}

/// Execute a validated configuration. The summary is returned, not written.
pub fn run(cfg: &RunConfig) -> Summary {
    let mut summary = Summary::new(cfg.mode);
    if let Err(e) = std::fs::create_dir_all(&cfg.out_dir) {
        summary.fail(Status::SolverError, format!("cannot create {}: {e}", cfg.out_dir.display()));
        summary.exit_code = summary.status.exit_code();
        return summary;
    }
    let result = match cfg.mode {
        Mode::Solve => run_solve(cfg, &mut summary, false),
        Mode::Check => run_solve(cfg, &mut summary, true),
        Mode::Mms => run_mms(cfg, &mut summary),
        Mode::SweepEps => run_sweep(cfg, &mut summary),
    };
    if let Err((status, message)) = result {
        summary.fail(status, message);
    }
    summary.exit_code = summary.status.exit_code();
    summary
}

pub fn write_summary(dir: &Path, summary: &Summary) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut out = BufWriter::new(File::create(dir.join("summary.json"))?);
    serde_json::to_writer_pretty(&mut out, summary)?;
    out.write_all(b"\n")?;
    out.flush()
}

/// Load, run and write the summary; returns the exit code.
pub fn execute(mode: Mode, config: &Path, overrides: &Overrides) -> i32 {
    let (summary, dir) = match load_config(config, mode, overrides) {
        Ok(cfg) => (run(&cfg), cfg.out_dir.clone()),
        Err(e) => {
            let dir = match (&e, crate::config::parse_file(config)) {
                (ConfigError::Invalid { .. }, Ok(handle)) if overrides.out.is_none() => {
                    handle.out_dir().unwrap_or_else(|| fallback_out_dir(overrides))
                }
                _ => fallback_out_dir(overrides),
            };
            let mut summary = Summary::new(mode);
            summary.fail(Status::ConfigError, e.to_string());
            summary.exit_code = summary.status.exit_code();
            (summary, dir)
        }
    };
    if let Some(e) = &summary.error {
        log::error!("{e}");
    }
    if let Err(e) = write_summary(&dir, &summary) {
        log::error!("cannot write summary to {}: {e}", dir.display());
    }
    summary.exit_code
}
