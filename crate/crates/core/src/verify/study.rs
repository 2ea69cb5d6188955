//! Grid-refinement studies against manufactured solutions.

use super::mms::{exact_state, mms_forcing, MmsCase};
use crate::driver::{picard_solve, PicardConfig};
use crate::error::{Error, Result};
use crate::grid::{cell_norms, face_mean, face_norms, grad, AdvectionScheme, CellField, UniformGrid};
use crate::linalg::{linear_solve, SolverOptions};
use crate::par;
use crate::params::{ModelParams, PhysicalCoefficients};
use crate::regularization::{h, TemperatureExtension};
use crate::subproblems::{
    cell_coefficient, momentum_forcing, phi_system, solve_system, stokes_system, temperature_system, transport_face_values, Context,
    SolverState, StokesOptions, ViscousForm,
};
use serde::{Deserialize, Serialize};

/// Which part of the system a study exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    /// Fraction equation with the exact velocity and temperature.
    Fraction,
    /// Temperature equation with the exact fraction and velocity.
    Temperature,
    /// Stokes problem with the exact fraction, temperature and transport.
    Stokes,
    /// The full regularized fixed point.
    Coupled,
}

/// How the regularization parameter follows the grid in coupled studies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EpsPolicy {
    Fixed { epsilon: f64 },
    /// `epsilon = factor * spacing`, capped at 1/4.
    Proportional { factor: f64 },
}

impl EpsPolicy {
    pub fn epsilon(&self, grid: &UniformGrid) -> f64 {
        match *self {
            EpsPolicy::Fixed { epsilon } => epsilon,
            EpsPolicy::Proportional { factor } => (factor * grid.spacing()).min(0.25),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub case: MmsCase,
    pub kind: StudyKind,
    /// Cells per side, each twice the previous.
    pub grids: Vec<usize>,
    pub epsilon: EpsPolicy,
    pub coefficients: PhysicalCoefficients,
    pub picard: PicardConfig,
    #[serde(default)]
    pub temperature_extension: TemperatureExtension,
}

/// Discrete `L2` errors on one grid; fields a study does not solve for are
/// `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridErrors {
    pub n: usize,
    pub spacing: f64,
    pub epsilon: Option<f64>,
    pub iterations: Option<usize>,
    pub phi: Option<f64>,
    pub temperature: Option<f64>,
    pub velocity: Option<f64>,
    pub pressure: Option<f64>,
}

/// Least-squares slopes of `log(error)` against `log(h)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldOrders {
    pub phi: Option<f64>,
    pub temperature: Option<f64>,
    pub velocity: Option<f64>,
    pub pressure: Option<f64>,
}

impl FieldOrders {
    /// Smallest order over the velocity-like fields present (pressure
    /// excluded).
    pub fn min_primary(&self) -> Option<f64> {
        [self.phi, self.temperature, self.velocity]
            .into_iter()
            .flatten()
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub case: String,
    pub kind: StudyKind,
    pub levels: Vec<GridErrors>,
    pub orders: FieldOrders,
}

/// Slope of the least-squares line through `(log h, log e)`.
pub fn fitted_order(spacing: &[f64], errors: &[f64]) -> f64 {
    let n = spacing.len() as f64;
    let xs: Vec<f64> = spacing.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn check_grids(grids: &[usize]) -> Result<()> {
    if grids.len() < 3 {
        return Err(Error::Precondition(format!(
            "a convergence study needs at least 3 grids, got {}",
            grids.len()
        )));
    }
    if let Some(w) = grids.windows(2).find(|w| w[1] != 2 * w[0]) {
        return Err(Error::Precondition(format!(
            "grids must refine by a factor of 2, got {} then {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

fn cell_error(grid: &UniformGrid, a: &CellField, b: &CellField) -> f64 {
    cell_norms(grid, &a.sub(b)).l2
}

fn zero_mean(p: &CellField) -> CellField {
    let m = p.mean();
    p.map(|v| v - m)
}

fn run_level(cfg: &StudyConfig, n: usize) -> Result<GridErrors> {
    let grid = UniformGrid::unit_square(n)?;
    let params = mms_forcing(&cfg.case, &grid, &cfg.coefficients)?;
    let epsilon = cfg.epsilon.epsilon(&grid);
    let exact = exact_state(&cfg.case, &grid, epsilon)?;
    let mut out = GridErrors {
        n,
        spacing: grid.spacing(),
        epsilon: None,
        iterations: None,
        phi: None,
        temperature: None,
        velocity: None,
        pressure: None,
    };
    let options = SolverOptions::default();
    match cfg.kind {
        StudyKind::Fraction => {
            let sys = phi_system(
                &grid,
                &exact.velocity,
                &drift(&grid, &exact, &params),
                &params.boundary,
                AdvectionScheme::Centered,
                params.phi_source.as_ref(),
            );
            let phi = CellField::from_values(&grid, linear_solve(&sys, &options)?.x)?;
            out.phi = Some(cell_error(&grid, &phi, &exact.phi));
        }
        StudyKind::Temperature => {
            let (k, carrier) = exact_coefficients(&grid, &exact, &params);
            let sys = temperature_system(&grid, &k, Some(&carrier), &params.heat_source);
            let t = CellField::from_values(&grid, linear_solve(&sys, &options)?.x)?;
            out.temperature = Some(cell_error(&grid, &t, &exact.temperature));
        }
        StudyKind::Stokes => {
            let (_, carrier) = exact_coefficients(&grid, &exact, &params);
            let mu = cell_coefficient(&exact.phi, |z| params.coefficients.viscosity.eval(z));
            let forcing = momentum_forcing(&grid, &exact.temperature, &params);
            let sys = stokes_system(&grid, &mu, ViscousForm::Symmetric, Some(&carrier), &forcing, StokesOptions::default());
            let sol = solve_system(&grid, &sys, &options, true)?;
            out.velocity = Some(face_norms(&grid, &sol.velocity.sub(&exact.velocity)).l2);
            out.pressure = Some(cell_error(&grid, &zero_mean(&sol.pressure), &exact.pressure));
        }
        StudyKind::Coupled => {
            let mut ctx = Context::new(&grid, epsilon)?;
            ctx.temperature_extension = cfg.temperature_extension;
            let initial = SolverState::initial(&grid, &params, epsilon)?;
            let outcome = picard_solve(&ctx, initial, &params, &cfg.picard)?;
            if !outcome.converged {
                return Err(Error::StudyAborted {
                    grid: n,
                    reason: format!(
                        "Picard iteration stalled at relative change {:e} after {} iterations",
                        outcome.change, outcome.iterations
                    ),
                });
            }
            let s = &outcome.state;
            out.epsilon = Some(epsilon);
            out.iterations = Some(outcome.iterations);
            out.phi = Some(cell_error(&grid, &s.phi, &exact.phi));
            out.temperature = Some(cell_error(&grid, &s.temperature, &exact.temperature));
            out.velocity = Some(face_norms(&grid, &s.velocity.sub(&exact.velocity)).l2);
            out.pressure = Some(cell_error(&grid, &zero_mean(&s.pressure), &exact.pressure));
        }
    }
    Ok(out)
}

/// Unregularized thermophoretic drift `h(phi)_face grad T / T_inf` of the
/// exact fields.
fn drift(grid: &UniformGrid, exact: &SolverState, params: &ModelParams) -> crate::grid::FaceField {
    face_mean(grid, &cell_coefficient(&exact.phi, h))
        .mul(&grad(grid, &exact.temperature))
        .scale(1.0 / params.coefficients.t_inf)
}

/// Face conductivity and the carrier `u + phi_face u + j` of the exact
/// fields.
fn exact_coefficients(
    grid: &UniformGrid,
    exact: &SolverState,
    params: &ModelParams,
) -> (crate::grid::FaceField, crate::grid::FaceField) {
    let k = face_mean(grid, &cell_coefficient(&exact.phi, |z| params.coefficients.conductivity.eval(z)));
    let j = grad(grid, &exact.phi).add(&drift(grid, exact, params)).scale(-1.0);
    let u = &exact.velocity;
    let total = u
        .mul(&transport_face_values(grid, &exact.phi, u, AdvectionScheme::Centered))
        .add(&j);
    (k, u.add(&total))
}

/// Run `cfg` on every grid and fit the observed orders.
///
/// The forcing is first validated by comparing its two differentiation
/// paths. Grids run concurrently; a stalled coupled iteration aborts the
/// study with the errors of the grids that did finish.
pub fn convergence_study(cfg: &StudyConfig) -> Result<StudyResult> {
    check_grids(&cfg.grids)?;
    cfg.case.validate()?;
    let agreement = cfg.case.forcing_cross_check(&cfg.coefficients);
    if !(agreement <= 1e-8) {
        return Err(Error::Precondition(format!(
            "forcing differentiation paths disagree by {agreement:e}"
        )));
    }
    let results = par::map_jobs(&cfg.grids, |&n| run_level(cfg, n));
    let mut levels = Vec::with_capacity(results.len());
    let mut failure = None;
    for r in results {
        match r {
            Ok(l) => levels.push(l),
            Err(e) => {
                failure.get_or_insert(e);
            }
        }
    }
    if let Some(e) = failure {
        let finished: Vec<String> = levels
            .iter()
            .map(|l| format!("{}: phi {:?} T {:?} u {:?}", l.n, l.phi, l.temperature, l.velocity))
            .collect();
        return Err(match e {
            Error::StudyAborted { grid, reason } => Error::StudyAborted {
                grid,
                reason: format!("{reason}; finished grids [{}]", finished.join(", ")),
            },
            other => other,
        });
    }
    let spacing: Vec<f64> = levels.iter().map(|l| l.spacing).collect();
    let order = |get: fn(&GridErrors) -> Option<f64>| -> Option<f64> {
        let e: Option<Vec<f64>> = levels.iter().map(get).collect();
        e.map(|e| fitted_order(&spacing, &e))
    };
    let orders = FieldOrders {
        phi: order(|l| l.phi),
        temperature: order(|l| l.temperature),
        velocity: order(|l| l.velocity),
        pressure: order(|l| l.pressure),
    };
    Ok(StudyResult {
        case: cfg.case.name().to_string(),
        kind: cfg.kind,
        levels,
        orders,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let h = [0.1, 0.05, 0.025];
        let e: Vec<f64> = h.iter().map(|h| 3.0 * h * h).collect();
        assert!((fitted_order(&h, &e) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn grid_list_is_checked() {
        assert!(matches!(check_grids(&[8, 16]), Err(Error::Precondition(_))));
        assert!(matches!(check_grids(&[8, 16, 24]), Err(Error::Precondition(_))));
        assert!(check_grids(&[8, 16, 32]).is_ok());
    }
}
