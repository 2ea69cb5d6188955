use crate::error::Result;
use crate::grid::{face_mean, grad, AdvectionScheme, BoundaryTrace, CellField, FaceField, UniformGrid};
use crate::linalg::{linear_solve, SolverOptions};
use crate::params::ModelParams;
use crate::regularization::h;
use crate::subproblems::{
    assemble_scalar, cell_coefficient, momentum_forcing, phi_system, plain_viscosity, stokes_system,
    temperature_system, transport_face_values, ScalarProblem, SolverState, StokesIndex, StokesOptions,
    ViscousForm,
};
use serde::{Deserialize, Serialize};

/// Dual norms of the residuals of the unregularized discrete equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakResidual {
    pub phi: f64,
    pub temperature: f64,
    pub velocity: f64,
}

impl WeakResidual {
    pub fn total(&self) -> f64 {
        (self.phi * self.phi + self.temperature * self.temperature + self.velocity * self.velocity).sqrt()
    }
}

/// Residual vectors `A(x) x - b(x)` of the unregularized equations: no
/// mollification, `h` instead of `h_eps`, the state's own velocity as
/// transport. Momentum residual on the velocity unknowns.
pub fn residual_vectors(
    grid: &UniformGrid,
    state: &SolverState,
    params: &ModelParams,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let c = &params.coefficients;
    let phi = state.phi.clone().with_dirichlet(params.boundary.clone());
    let temperature = state.temperature.clone().with_zero_dirichlet();
    let u = &state.velocity;

    let drift = face_mean(grid, &cell_coefficient(&phi, h))
        .mul(&grad(grid, &temperature))
        .scale(1.0 / c.t_inf);
    let sys = phi_system(grid, u, &drift, &params.boundary, AdvectionScheme::Centered, params.phi_source.as_ref());
    let r_phi = sys.matrix.residual(phi.values(), &sys.rhs);

    let flux = grad(grid, &phi).add(&drift).scale(-1.0);
    let total = u.mul(&transport_face_values(grid, &phi, u, AdvectionScheme::Centered)).add(&flux);
    let carrier = u.add(&total);
    let k_faces = face_mean(grid, &cell_coefficient(&phi, |z| c.conductivity.eval(z)));
    let sys = temperature_system(grid, &k_faces, Some(&carrier), &params.heat_source);
    let r_t = sys.matrix.residual(temperature.values(), &sys.rhs);

    let forcing = momentum_forcing(grid, &temperature, params);
    let mu = plain_viscosity(&phi, params);
    let sys = stokes_system(grid, &mu, ViscousForm::Symmetric, Some(&carrier), &forcing, StokesOptions::default());
    let idx = StokesIndex::new(grid);
    let mut x = idx.pack_velocity(u);
    x.extend_from_slice(state.pressure.values());
    let mut r_u = sys.matrix.residual(&x, &sys.rhs);
    r_u.truncate(idx.velocity_count());
    Ok((r_phi, r_t, r_u))
}

/// `sup <r, v> / ||grad v||` over zero-Dirichlet cell functions.
pub fn cell_dual_norm(grid: &UniformGrid, r: &[f64]) -> Result<f64> {
    let ones = FaceField::from_fns(grid, |_, _| 1.0, |_, _| 1.0);
    let zero = BoundaryTrace::zeros(grid);
    let sys = assemble_scalar(
        grid,
        &ScalarProblem {
            diffusivity: &ones,
            transport: None,
            scheme: AdvectionScheme::Centered,
            boundary: &zero,
            source: r,
        },
    );
    let z = linear_solve(&sys, &SolverOptions::default())?.x;
    Ok(grid.cell_dot(r, &z).max(0.0).sqrt())
}

/// `sup <r, v> / ||grad v||` over discretely divergence-free no-slip
/// velocities; `r` is given on the velocity unknowns.
pub fn velocity_dual_norm(grid: &UniformGrid, r: &[f64]) -> Result<f64> {
    let idx = StokesIndex::new(grid);
    let mut padded = r.to_vec();
    padded.resize(idx.len(), 0.0);
    let (rhs, _) = idx.unpack(&padded);
    let sys = stokes_system(
        grid,
        &CellField::constant(grid, 1.0),
        ViscousForm::Laplacian,
        None,
        &rhs,
        StokesOptions::default(),
    );
    let z = linear_solve(&sys, &SolverOptions::default())?.x;
    let dot: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>() * grid.cell_area();
    Ok(dot.max(0.0).sqrt())
}

/// Residual of `state` in the unregularized model, measured in the dual
/// norms of the discrete test spaces.
pub fn weak_residual(grid: &UniformGrid, state: &SolverState, params: &ModelParams) -> Result<WeakResidual> {
    let (r_phi, r_t, r_u) = residual_vectors(grid, state, params)?;
    Ok(WeakResidual {
        phi: cell_dual_norm(grid, &r_phi)?,
        temperature: cell_dual_norm(grid, &r_t)?,
        velocity: velocity_dual_norm(grid, &r_u)?,
    })
}
