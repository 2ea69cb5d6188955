use super::{IterationRecord, PicardConfig, RestartPolicy, SolveResiduals};
use crate::error::{Error, Result};
use crate::grid::{cell_norms, face_norms, AdvectionScheme, CellField, Norms, UniformGrid};
use crate::params::ModelParams;
use crate::subproblems::{
    compute_flux, solve_phi, solve_stokes, solve_temperature, Context, SolverState, StokesOptions,
};

/// Image of one state under the map, with the record describing it.
#[derive(Debug, Clone)]
pub struct MapOutput {
    pub state: SolverState,
    pub record: IterationRecord,
}

#[derive(Debug, Clone)]
pub struct PicardOutcome {
    /// Converged state, or the best iterate seen.
    pub state: SolverState,
    pub converged: bool,
    pub iterations: usize,
    /// Relative change of the returned state.
    pub change: f64,
    pub history: Vec<IterationRecord>,
}

fn h1_sq(n: &Norms) -> f64 {
    n.l2 * n.l2 + n.h1_semi * n.h1_semi
}

/// Relative `H1` distance `||b - a|| / ||b||` over the three fields.
fn relative_change(grid: &UniformGrid, a: &SolverState, b: &SolverState) -> f64 {
    let dphi = b.phi.sub(&a.phi).with_zero_dirichlet();
    let dt = b.temperature.sub(&a.temperature).with_zero_dirichlet();
    let du = b.velocity.sub(&a.velocity);
    let num = h1_sq(&cell_norms(grid, &dphi)) + h1_sq(&cell_norms(grid, &dt)) + h1_sq(&face_norms(grid, &du));
    let den = h1_sq(&cell_norms(grid, &b.phi))
        + h1_sq(&cell_norms(grid, &b.temperature))
        + h1_sq(&face_norms(grid, &b.velocity));
    (num / den.max(1e-300)).sqrt()
}

/// One evaluation of the map: fraction, flux, temperature, velocity.
pub fn apply_g(ctx: &Context, state: &SolverState, params: &ModelParams) -> Result<MapOutput> {
    let grid = ctx.grid();
    let phi = solve_phi(ctx, state, params)?;
    let flux = compute_flux(ctx, &phi, params)?;
    let temperature = solve_temperature(ctx, state, &phi, &flux, params)?;
    let stokes = solve_stokes(ctx, state, &phi, &flux, params, StokesOptions::default())?;
    let mut image = SolverState::from_fields(
        phi.phi.clone(),
        temperature.temperature,
        stokes.velocity,
        stokes.pressure,
        ctx.epsilon(),
    );
    let change = relative_change(grid, state, &image);
    let record = IterationRecord {
        iteration: state.diagnostics.len() + 1,
        epsilon: ctx.epsilon(),
        damping: 1.0,
        change,
        phi: cell_norms(grid, &image.phi),
        temperature: cell_norms(grid, &image.temperature),
        velocity: face_norms(grid, &image.velocity),
        flux_defect: flux.defect,
        flux_threshold: flux.threshold,
        newton_steps: phi.newton_iterations,
        phi_min: phi.min,
        phi_max: phi.max,
        bound_violation: phi.bound_violation(),
        transport_divergence: phi.transport_divergence,
        velocity_divergence: stokes.divergence,
        coercivity_margin: temperature.coercivity_margin,
        linear_residuals: SolveResiduals {
            phi: phi.linear_residual,
            temperature: temperature.linear_residual,
            stokes: stokes.linear_residual,
        },
        restarted: false,
    };
    image.diagnostics = state.diagnostics.clone();
    image.diagnostics.push(record.clone());
    Ok(MapOutput { state: image, record })
}

fn blend_cells(a: &CellField, b: &CellField, w: f64) -> CellField {
    let mut out = b.clone();
    out.values_mut()
        .iter_mut()
        .zip(a.values())
        .for_each(|(bv, av)| *bv = (1.0 - w) * av + w * *bv);
    out
}

fn blend(a: &SolverState, b: &SolverState, w: f64) -> SolverState {
    if w == 1.0 {
        return b.clone();
    }
    SolverState {
        phi: blend_cells(&a.phi, &b.phi, w),
        temperature: blend_cells(&a.temperature, &b.temperature, w),
        velocity: a.velocity.lin_comb(1.0 - w, &b.velocity, w),
        pressure: blend_cells(&a.pressure, &b.pressure, w),
        epsilon: b.epsilon,
        diagnostics: b.diagnostics.clone(),
    }
}

/// Iterate `x <- (1 - w) x + w G(x)` until the relative change drops below
/// the tolerance. Running out of iterations is reported in the outcome,
/// not as an error.
pub fn picard_solve(
    ctx: &Context,
    initial: SolverState,
    params: &ModelParams,
    cfg: &PicardConfig,
) -> Result<PicardOutcome> {
    cfg.validate()?;
    let grid = *ctx.grid();
    params.validate(&grid)?;
    let mut ctx = ctx.clone();
    ctx.bound_tol = cfg.bound_tol;
    let mut x = initial;
    x.epsilon = ctx.epsilon();
    x.diagnostics.clear();
    x.check_admissible(&grid, cfg.bound_tol)?;

    let mut damping = cfg.damping;
    let mut best: Option<(SolverState, f64)> = None;
    let mut history: Vec<IterationRecord> = Vec::new();
    let mut previous = f64::INFINITY;
    let mut rising = 0;
    let mut restarts = 0;
    for iteration in 1..=cfg.max_iters {
        let MapOutput { state: mut image, mut record } =
            apply_g(&ctx, &x, params).map_err(|e| e.in_iteration(iteration))?;
        record.iteration = iteration;
        record.damping = damping;
        if record.bound_violation > cfg.bound_tol {
            match ctx.scheme {
                AdvectionScheme::Upwind => {
                    return Err(Error::BoundViolation {
                        min: record.phi_min,
                        max: record.phi_max,
                        tol: cfg.bound_tol,
                    }
                    .in_iteration(iteration))
                }
                // centered transport has no discrete maximum principle: the
                // overshoot is recorded and clipped before the next map
                AdvectionScheme::Centered => image.phi.map_in_place(|v| v.clamp(0.0, 1.0)),
            }
        }
        let change = record.change;
        if !change.is_finite() {
            return Err(Error::NonFinite("fixed-point change").in_iteration(iteration));
        }
        if best.as_ref().is_none_or(|b| change < b.1) {
            best = Some((x.clone(), change));
        }
        let mut next = blend(&x, &image, damping);
        next.diagnostics.clear();
        if change <= cfg.tol {
            history.push(record);
            next.diagnostics = history.clone();
            return Ok(PicardOutcome {
                state: next,
                converged: true,
                iterations: iteration,
                change,
                history,
            });
        }
        rising = if change > previous { rising + 1 } else { 0 };
        previous = change;
        if let RestartPolicy::HalveDamping { patience, max_restarts } = cfg.restart {
            if rising >= patience.max(1) && restarts < max_restarts {
                restarts += 1;
                rising = 0;
                previous = f64::INFINITY;
                damping *= 0.5;
                record.restarted = true;
                log::info!("restarting from best iterate with damping {damping}");
                next = best.as_ref().map(|b| b.0.clone()).unwrap_or(next);
            }
        }
        history.push(record);
        x = next;
    }
    let (mut state, change) = best.expect("at least one iteration");
    state.diagnostics = history.clone();
    Ok(PicardOutcome {
        state,
        converged: false,
        iterations: cfg.max_iters,
        change,
        history,
    })
}
