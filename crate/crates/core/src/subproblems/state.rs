use crate::driver::IterationRecord;
use crate::error::{Error, Result};
use crate::grid::{harmonic_extension, BoundaryTrace, CellField, FaceField, UniformGrid};
use crate::params::ModelParams;

/// Iterate of the fixed-point map: fraction, temperature, velocity and
/// pressure, with the history that produced it.
#[derive(Debug, Clone)]
pub struct SolverState {
    /// Carries the boundary fraction as its Dirichlet trace.
    pub phi: CellField,
    /// Zero Dirichlet.
    pub temperature: CellField,
    /// No-slip staggered velocity.
    pub velocity: FaceField,
    /// Zero mean.
    pub pressure: CellField,
    pub epsilon: f64,
    pub diagnostics: Vec<IterationRecord>,
}

impl SolverState {
    /// `phi` harmonic with the boundary data, `T = 0`, `u = 0`.
    pub fn initial(grid: &UniformGrid, params: &ModelParams, epsilon: f64) -> Result<Self> {
        Ok(Self::from_fields(
            harmonic_extension(grid, &params.boundary)?,
            CellField::zeros(grid),
            FaceField::zeros(grid),
            CellField::zeros(grid),
            epsilon,
        ))
    }

    /// Assemble a state, attaching the boundary conventions (`phi` keeps its
    /// Dirichlet trace when it has one; `T` is zero on the walls).
    pub fn from_fields(
        phi: CellField,
        temperature: CellField,
        velocity: FaceField,
        pressure: CellField,
        epsilon: f64,
    ) -> Self {
        Self {
            phi,
            temperature: temperature.with_zero_dirichlet(),
            velocity,
            pressure,
            epsilon,
            diagnostics: Vec::new(),
        }
    }

    pub fn grid_matches(&self, grid: &UniformGrid) -> bool {
        self.phi.matches(grid)
            && self.temperature.matches(grid)
            && self.velocity.matches(grid)
            && self.pressure.matches(grid)
    }

    pub fn is_finite(&self) -> bool {
        self.phi.is_finite()
            && self.temperature.is_finite()
            && self.velocity.is_finite()
            && self.pressure.is_finite()
    }

    /// Check that the state is a valid input of the map: matching shapes,
    /// finite values and `-tol <= phi <= 1 + tol`.
    pub fn check_admissible(&self, grid: &UniformGrid, bound_tol: f64) -> Result<()> {
        if !self.grid_matches(grid) {
            return Err(Error::Shape("state does not match grid".into()));
        }
        if !self.is_finite() {
            return Err(Error::NonFinite("state"));
        }
        let (min, max) = (self.phi.min(), self.phi.max());
        if min < -bound_tol || max > 1.0 + bound_tol {
            return Err(Error::BoundViolation {
                min,
                max,
                tol: bound_tol,
            });
        }
        Ok(())
    }

    /// Re-attach `trace` as the Dirichlet data of `phi`.
    pub fn with_boundary(mut self, trace: &BoundaryTrace) -> Self {
        self.phi = self.phi.with_dirichlet(trace.clone());
        self
    }
}
