//! Stationary nanofluid convection solver.
//!
//! The unknowns are the particle volume fraction `phi`, the temperature `T`,
//! the velocity `u` and the pressure `p` on a rectangle discretized with a
//! staggered (MAC) grid. The nonlinear system is regularized by mollifying the
//! transport fields and replacing the thermophoretic mobility
//! `h(z) = z+ (1-z)+` with a C¹ cubic cutoff `h_eps`; the regularized problem
//! is solved as a fixed point of a map built from three linear subproblems,
//! and the regularization is then driven towards zero by continuation.
//!
//! Module map:
//!
//! * [`regularization`]: `h`, `h_eps`, the mollifier kernel and discrete convolution.
//! * [`grid`]: geometry, fields, summation-by-parts operators, projection, norms.
//! * [`linalg`]: sparse assembly and the linear solvers.
//! * [`params`]: physical coefficients and problem data.
//! * [`subproblems`]: the `phi`, flux, temperature and Stokes solves.
//! * [`driver`]: Picard iteration, continuation and the weak residual.
//! * [`verify`]: manufactured solutions, invariant suite, dense oracle.

pub mod driver;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod par;
pub mod params;
pub mod regularization;
pub mod subproblems;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{Boundary, BoundaryTrace, CellField, FaceField, Side, UniformGrid};
pub use params::{LinearCoefficient, ModelParams, PhysicalCoefficients};
pub use regularization::{CutoffFamily, MollifierKernel, TemperatureExtension};
pub use subproblems::SolverState;
