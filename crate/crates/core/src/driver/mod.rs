//! Damped Picard iteration on the regularized map, continuation in the
//! regularization parameter and the unregularized residual monitor.

mod continuation;
mod picard;
mod residual;

pub use continuation::{continuation, ContinuationOutcome, EpsSchedule, LevelResult};
pub use picard::{apply_g, picard_solve, MapOutput, PicardOutcome};
pub use residual::{cell_dual_norm, residual_vectors, velocity_dual_norm, weak_residual, WeakResidual};

use crate::error::{Error, Result};
use crate::grid::Norms;
use serde::{Deserialize, Serialize};

/// What to do when the iteration stops contracting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RestartPolicy {
    /// Keep iterating until the cap.
    Never,
    /// After `patience` consecutive increases of the change, restart from the
    /// best iterate with the damping halved, at most `max_restarts` times.
    HalveDamping { patience: usize, max_restarts: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardConfig {
    /// Weight of the new iterate, in `(0, 1]`.
    pub damping: f64,
    /// Threshold on the relative `H1` change `||G(x) - x|| / ||G(x)||`.
    pub tol: f64,
    pub max_iters: usize,
    /// Admissible overshoot of the fraction outside `[0, 1]`.
    pub bound_tol: f64,
    pub restart: RestartPolicy,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            damping: 1.0,
            tol: 1e-8,
            max_iters: 200,
            bound_tol: 1e-10,
            restart: RestartPolicy::Never,
        }
    }
}

impl PicardConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter(format!("tol > 0 required, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be positive".into()));
        }
        if !(self.bound_tol >= 0.0) {
            return Err(Error::InvalidParameter("bound_tol must be non-negative".into()));
        }
        Ok(())
    }
}

/// Linear-solver residuals of the three subproblems.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolveResiduals {
    pub phi: f64,
    pub temperature: f64,
    pub stokes: f64,
}

/// One line of the iteration history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub epsilon: f64,
    pub damping: f64,
    /// Relative `H1` distance between the input and its image.
    pub change: f64,
    pub phi: Norms,
    pub temperature: Norms,
    pub velocity: Norms,
    pub flux_defect: f64,
    /// Certification bound the defect was checked against.
    pub flux_threshold: f64,
    /// Newton steps of the fraction solve.
    pub newton_steps: usize,
    pub phi_min: f64,
    pub phi_max: f64,
    /// Distance of the new fraction from `[0, 1]` before any clipping.
    pub bound_violation: f64,
    pub transport_divergence: f64,
    pub velocity_divergence: f64,
    pub coercivity_margin: f64,
    pub linear_residuals: SolveResiduals,
    /// Set on the iteration after which a restart happened.
    pub restarted: bool,
}
