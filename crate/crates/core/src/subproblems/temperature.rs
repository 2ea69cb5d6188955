use super::coefficients::mollified_coefficient;
use super::scalar::{assemble_scalar, ScalarProblem};
use super::{Context, FluxSolution, PhiSolution, SolverState};
use crate::error::Result;
use crate::grid::{analytic_min_eigenvalue, div, face_mean, AdvectionScheme, BoundaryTrace, CellField, FaceField, UniformGrid};
use crate::linalg::{linear_solve, LinearSystem};
use crate::params::ModelParams;

#[derive(Debug, Clone)]
pub struct TemperatureSolution {
    /// Zero Dirichlet trace attached.
    pub temperature: CellField,
    pub linear_residual: f64,
    /// Lower bound on the smallest eigenvalue of the symmetric part of the
    /// system: `k_min lambda_min(-lap) - max|div G| / 2`.
    pub coercivity_margin: f64,
}

/// `-div(k grad T) + div(G T_face) = f`, `T = 0` on the walls, centered
/// transport with the exterior extended by zero.
pub fn temperature_system(
    grid: &UniformGrid,
    conductivity: &FaceField,
    transport: Option<&FaceField>,
    source: &CellField,
) -> LinearSystem {
    let zero = BoundaryTrace::zeros(grid);
    assemble_scalar(
        grid,
        &ScalarProblem {
            diffusivity: conductivity,
            transport,
            scheme: AdvectionScheme::Centered,
            boundary: &zero,
            source: source.values(),
        },
    )
}

/// Solve for the new temperature, transported by the mollified velocity and
/// the certified total flux.
pub fn solve_temperature(
    ctx: &Context,
    old: &SolverState,
    phi: &PhiSolution,
    flux: &FluxSolution,
    params: &ModelParams,
) -> Result<TemperatureSolution> {
    let grid = ctx.grid();
    let k = params.coefficients.conductivity;
    let k_cells = mollified_coefficient(&old.phi, &params.boundary, |z| k.eval(z), ctx.kernel())?;
    let k_faces = face_mean(grid, &k_cells);
    let carrier = phi.transport.add(&flux.total);
    let margin = k.lower_bound() * analytic_min_eigenvalue(grid) - 0.5 * div(grid, &carrier).max_abs();
    if margin <= 0.0 {
        log::warn!("temperature system may have lost coercivity: margin {margin:e}");
    }
    let system = temperature_system(grid, &k_faces, Some(&carrier), &params.heat_source);
    let solution = linear_solve(&system, &ctx.solver)?;
    Ok(TemperatureSolution {
        temperature: CellField::from_values(grid, solution.x)?.with_zero_dirichlet(),
        linear_residual: solution.residual,
        coercivity_margin: margin,
    })
}
