use super::{picard_solve, weak_residual, PicardConfig, WeakResidual};
use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::params::ModelParams;
use crate::subproblems::{Context, SolverState};
use serde::{Deserialize, Serialize};

/// Geometric sequence `eps0 * factor^n`, `n = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsSchedule {
    pub eps0: f64,
    pub factor: f64,
    pub n_steps: usize,
    pub eps_min: f64,
}

impl EpsSchedule {
    pub fn new(eps0: f64, factor: f64, n_steps: usize, eps_min: f64, grid: &UniformGrid) -> Result<Self> {
        let s = Self {
            eps0,
            factor,
            n_steps,
            eps_min,
        };
        s.validate(grid)?;
        Ok(s)
    }

    /// A single level.
    pub fn single(epsilon: f64, grid: &UniformGrid) -> Result<Self> {
        Self::new(epsilon, 0.5, 0, epsilon, grid)
    }

    pub fn validate(&self, grid: &UniformGrid) -> Result<()> {
        if !(self.eps0 > 0.0 && self.eps0 <= 0.25) {
            return Err(Error::InvalidEpsilon { epsilon: self.eps0 });
        }
        if !(self.factor > 0.0 && self.factor < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "schedule factor must lie in (0, 1), got {}",
                self.factor
            )));
        }
        let minimum = 2.0 * grid.spacing();
        if !(self.eps_min >= minimum * (1.0 - 1e-12)) {
            return Err(Error::KernelTooNarrow {
                radius: self.eps_min,
                minimum,
            });
        }
        let last = self.last();
        if last < self.eps_min * (1.0 - 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "schedule reaches {last} below its floor {}",
                self.eps_min
            )));
        }
        Ok(())
    }

    pub fn last(&self) -> f64 {
        self.eps0 * self.factor.powi(self.n_steps as i32)
    }

    pub fn levels(&self) -> Vec<f64> {
        (0..=self.n_steps)
            .map(|n| self.eps0 * self.factor.powi(n as i32))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct LevelResult {
    pub epsilon: f64,
    pub converged: bool,
    pub iterations: usize,
    pub change: f64,
    pub weak_residual: WeakResidual,
    pub state: SolverState,
}

#[derive(Debug, Clone)]
pub struct ContinuationOutcome {
    pub levels: Vec<LevelResult>,
    /// Level at which the run stopped after two consecutive failures.
    pub aborted_at: Option<f64>,
}

impl ContinuationOutcome {
    pub fn final_level(&self) -> Option<&LevelResult> {
        self.levels.last()
    }

    /// `Err` if the run was aborted.
    pub fn check(&self) -> Result<()> {
        match self.aborted_at {
            Some(epsilon) => Err(Error::ContinuationAborted { epsilon }),
            None => Ok(()),
        }
    }
}

/// Solve each level of `schedule` warm-started from the previous one and
/// record the unregularized residual after each.
pub fn continuation(
    ctx: &Context,
    initial: SolverState,
    params: &ModelParams,
    schedule: &EpsSchedule,
    cfg: &PicardConfig,
) -> Result<ContinuationOutcome> {
    let grid = *ctx.grid();
    schedule.validate(&grid)?;
    let mut state = initial;
    let mut levels: Vec<LevelResult> = Vec::new();
    let mut failures = 0;
    for epsilon in schedule.levels() {
        let level_ctx = ctx.with_epsilon(epsilon)?;
        let outcome = picard_solve(&level_ctx, state, params, cfg)?;
        let residual = weak_residual(&grid, &outcome.state, params)?;
        log::info!(
            "eps {epsilon}: converged {} in {} iterations, weak residual {:e}",
            outcome.converged,
            outcome.iterations,
            residual.total()
        );
        state = outcome.state.clone();
        levels.push(LevelResult {
            epsilon,
            converged: outcome.converged,
            iterations: outcome.iterations,
            change: outcome.change,
            weak_residual: residual,
            state: outcome.state,
        });
        failures = if outcome.converged { 0 } else { failures + 1 };
        if failures >= 2 {
            return Ok(ContinuationOutcome {
                levels,
                aborted_at: Some(epsilon),
            });
        }
    }
    Ok(ContinuationOutcome {
        levels,
        aborted_at: None,
    })
}
