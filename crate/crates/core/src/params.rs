//! Physical coefficients and problem data.

use crate::error::{Error, Result};
use crate::grid::{BoundaryTrace, CellField, FaceField, UniformGrid};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `c(phi) = c0 + c1 phi`, evaluated on `phi` clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearCoefficient {
    pub c0: f64,
    pub c1: f64,
}

impl LinearCoefficient {
    pub fn new(c0: f64, c1: f64) -> Self {
        Self { c0, c1 }
    }

    pub fn constant(c: f64) -> Self {
        Self { c0: c, c1: 0.0 }
    }

    #[inline]
    pub fn eval(&self, phi: f64) -> f64 {
        self.c0 + self.c1 * phi.clamp(0.0, 1.0)
    }

    /// Minimum over `[0, 1]`.
    pub fn lower_bound(&self) -> f64 {
        self.c0.min(self.c0 + self.c1)
    }

    pub fn upper_bound(&self) -> f64 {
        self.c0.max(self.c0 + self.c1)
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.c0.is_finite() && self.c1.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name}: coefficients must be finite")));
        }
        if self.lower_bound() <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "{name}: {name}(z) > 0 required on [0, 1], minimum is {}",
                self.lower_bound()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalCoefficients {
    pub conductivity: LinearCoefficient,
    pub viscosity: LinearCoefficient,
    /// Buoyancy coefficient.
    pub beta: f64,
    /// Unit vector along gravity.
    pub gravity: (f64, f64),
    /// Reference temperature in the thermophoretic flux.
    pub t_inf: f64,
}

impl Default for PhysicalCoefficients {
    fn default() -> Self {
        Self {
            conductivity: LinearCoefficient::constant(1.0),
            viscosity: LinearCoefficient::constant(1.0),
            beta: 0.0,
            gravity: (0.0, -1.0),
            t_inf: 1.0,
        }
    }
}

impl PhysicalCoefficients {
    pub fn validate(&self) -> Result<()> {
        self.conductivity.validate("conductivity")?;
        self.viscosity.validate("viscosity")?;
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "beta ≥ 0 required, got {}",
                self.beta
            )));
        }
        let norm = self.gravity.0.hypot(self.gravity.1);
        if !((norm - 1.0).abs() <= 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "gravity must be a unit vector, |e_g| = {norm}"
            )));
        }
        if !(self.t_inf.is_finite() && self.t_inf > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "t_inf > 0 required, got {}",
                self.t_inf
            )));
        }
        Ok(())
    }
}

/// Coefficients plus grid-sampled data.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub coefficients: PhysicalCoefficients,
    /// Volume fraction on the boundary faces.
    pub boundary: BoundaryTrace,
    pub heat_source: CellField,
    pub body_force: FaceField,
    /// Source in the particle balance. Only manufactured solutions use it;
    /// the physical model has none.
    pub phi_source: Option<CellField>,
}

impl ModelParams {
    pub fn validate(&self, grid: &UniformGrid) -> Result<()> {
        self.coefficients.validate()?;
        if !self.boundary.matches(grid) {
            return Err(Error::Shape("boundary data does not match grid".into()));
        }
        self.boundary.check_unit_range()?;
        if !self.heat_source.matches(grid) || !self.body_force.matches(grid) {
            return Err(Error::Shape("source terms do not match grid".into()));
        }
        if !self.heat_source.is_finite() || !self.body_force.is_finite() {
            return Err(Error::NonFinite("source terms"));
        }
        if let Some(s) = &self.phi_source {
            if !s.matches(grid) {
                return Err(Error::Shape("phi source does not match grid".into()));
            }
            if !s.is_finite() {
                return Err(Error::NonFinite("phi source"));
            }
        }
        Ok(())
    }

    /// Unit coefficients, no sources, constant boundary fraction `c`: the
    /// state `(c, 0, 0)` is an exact solution.
    pub fn trivial(grid: &UniformGrid, c: f64) -> Self {
        Self {
            coefficients: PhysicalCoefficients::default(),
            boundary: BoundaryTrace::constant(grid, c),
            heat_source: CellField::zeros(grid),
            body_force: FaceField::zeros(grid),
            phi_source: None,
        }
    }

    /// Weakly coupled data: `k = mu = 1 + 0.1 phi`, `beta = 0.1`,
    /// `b = 0.5`, heat source and body force of discrete norm 0.1.
    pub fn small_data(grid: &UniformGrid) -> Self {
        let coefficients = PhysicalCoefficients {
            conductivity: LinearCoefficient::new(1.0, 0.1),
            viscosity: LinearCoefficient::new(1.0, 0.1),
            beta: 0.1,
            ..PhysicalCoefficients::default()
        };
        let (x0, y0) = grid.origin();
        let (lx, ly) = grid.extent();
        let f = CellField::from_fn(grid, |x, y| {
            (PI * (x - x0) / lx).sin() * (PI * (y - y0) / ly).sin()
        });
        let g = FaceField::from_fns(
            grid,
            |_, y| (2.0 * PI * (y - y0) / ly).sin(),
            |x, _| -(2.0 * PI * (x - x0) / lx).sin(),
        );
        Self {
            coefficients,
            boundary: BoundaryTrace::constant(grid, 0.5),
            heat_source: rescale_cells(grid, f, 0.1),
            body_force: rescale_faces(grid, g, 0.1),
            phi_source: None,
        }
    }

    /// Strong buoyancy against a large heat source: damped-free Picard
    /// iteration does not settle on this data.
    pub fn adversarial(grid: &UniformGrid) -> Self {
        let mut p = Self::small_data(grid);
        p.coefficients.beta = 2.0e4;
        p.heat_source = rescale_cells(grid, p.heat_source, 50.0);
        p.body_force = FaceField::zeros(grid);
        p
    }
}

/// Scale `f` to discrete `L2` norm `target`.
pub fn rescale_cells(grid: &UniformGrid, f: CellField, target: f64) -> CellField {
    let n = grid.cell_dot(f.values(), f.values()).sqrt();
    if n == 0.0 {
        return f;
    }
    f.map(|v| v * target / n)
}

/// Scale `g` to face-norm `target`.
pub fn rescale_faces(grid: &UniformGrid, g: FaceField, target: f64) -> FaceField {
    let n = grid.face_dot(&g, &g).sqrt();
    if n == 0.0 {
        return g;
    }
    g.scale(target / n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_bounds() {
        let k = LinearCoefficient::new(1.0, -0.5);
        assert_eq!(k.lower_bound(), 0.5);
        assert_eq!(k.eval(2.0), 0.5);
        assert!(LinearCoefficient::new(0.2, -0.3).validate("k").is_err());
    }

    #[test]
    fn small_data_norms() {
        let g = UniformGrid::unit_square(32).unwrap();
        let p = ModelParams::small_data(&g);
        p.validate(&g).unwrap();
        let nf = g.cell_dot(p.heat_source.values(), p.heat_source.values()).sqrt();
        let ng = g.face_dot(&p.body_force, &p.body_force).sqrt();
        assert!((nf - 0.1).abs() < 1e-14 && (ng - 0.1).abs() < 1e-14);
    }

    #[test]
    fn invalid_parameters_are_named() {
        let g = UniformGrid::unit_square(8).unwrap();
        let mut p = ModelParams::trivial(&g, 0.5);
        p.coefficients.beta = -1.0;
        let msg = p.validate(&g).unwrap_err().to_string();
        assert!(msg.contains("beta ≥ 0"), "{msg}");
        p.coefficients.beta = 0.0;
        p.coefficients.gravity = (1.0, 1.0);
        assert!(p.validate(&g).is_err());
    }
}
