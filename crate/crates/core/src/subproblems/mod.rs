//! The three linear subproblems of one fixed-point map evaluation and the
//! particle flux between them.
//!
//! Order of evaluation: [`solve_phi`], [`compute_flux`], then
//! [`solve_temperature`] and [`solve_stokes`], which both consume the same
//! certified total flux.

mod coefficients;
mod phi;
mod scalar;
mod state;
mod stokes;
mod temperature;

pub use coefficients::{cell_coefficient, mollified_coefficient};
pub use phi::{compute_flux, phi_system, solve_phi, FluxSolution, PhiSolution};
pub use scalar::{assemble_scalar, transport, transport_face_values, ScalarProblem};
pub use state::SolverState;
pub use stokes::{
    korn_constant, momentum_forcing, solve_stokes, solve_system, stokes_system, vector_laplacian, StokesIndex, StokesOptions,
    StokesSolution, ViscousForm,
};
pub use temperature::{solve_temperature, temperature_system, TemperatureSolution};

use crate::error::Result;
use crate::grid::{AdvectionScheme, Projector, UniformGrid};
use crate::linalg::SolverOptions;
use crate::regularization::{build_kernel, CutoffFamily, MollifierKernel, TemperatureExtension};
use std::sync::Arc;

/// Everything the subproblems need besides the state and the data: grid,
/// regularization at the current `epsilon`, the cached projector and
/// solver settings.
#[derive(Debug, Clone)]
pub struct Context {
    grid: UniformGrid,
    cutoff: CutoffFamily,
    kernel: MollifierKernel,
    projector: Arc<Projector>,
    /// Transport scheme of the `phi` equation.
    pub scheme: AdvectionScheme,
    pub solver: SolverOptions,
    /// Admissible overshoot of an input fraction outside `[0, 1]`.
    pub bound_tol: f64,
    pub temperature_extension: TemperatureExtension,
}

impl Context {
    pub fn new(grid: &UniformGrid, epsilon: f64) -> Result<Self> {
        let cutoff = CutoffFamily::new(epsilon)?;
        let kernel = build_kernel(epsilon, grid)?;
        Ok(Self {
            grid: *grid,
            cutoff,
            kernel,
            projector: Arc::new(Projector::new(grid)?),
            scheme: AdvectionScheme::Centered,
            solver: SolverOptions::default(),
            bound_tol: 1e-10,
            temperature_extension: TemperatureExtension::default(),
        })
    }

    /// Same grid and settings at a different regularization.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Ok(Self {
            cutoff: CutoffFamily::new(epsilon)?,
            kernel: build_kernel(epsilon, &self.grid)?,
            ..self.clone()
        })
    }

    pub fn with_scheme(mut self, scheme: AdvectionScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn epsilon(&self) -> f64 {
        self.cutoff.epsilon()
    }

    pub fn cutoff(&self) -> &CutoffFamily {
        &self.cutoff
    }

    pub fn kernel(&self) -> &MollifierKernel {
        &self.kernel
    }

    pub fn projector(&self) -> &Projector {
        &self.projector
    }
}

pub(crate) use stokes::plain_viscosity;
