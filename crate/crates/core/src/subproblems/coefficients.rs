use crate::error::Result;
use crate::grid::{Boundary, BoundaryTrace, CellField, Side};
use crate::regularization::{mollify_reflected, MollifierKernel};

/// `f(phi)` at cells, with ghost values `f(phi_ghost)` so that face means
/// across walls see the reflected fraction.
pub fn cell_coefficient(phi: &CellField, f: impl Fn(f64) -> f64) -> CellField {
    let (nx, ny) = phi.shape();
    let side = |s: Side, n: usize| (0..n).map(|k| f(phi.ghost(s, k))).collect::<Vec<_>>();
    let trace = BoundaryTrace::from_parts(
        side(Side::Left, ny),
        side(Side::Right, ny),
        side(Side::Bottom, nx),
        side(Side::Top, nx),
    );
    CellField::from_parts(nx, ny, phi.values().iter().map(|&v| f(v)).collect(), Boundary::Ghost(trace))
}

/// Mollified `f(E phi)`, where `E phi` continues the fraction beyond the
/// walls by reflection through the boundary data.
pub fn mollified_coefficient(
    phi: &CellField,
    boundary: &BoundaryTrace,
    f: impl Fn(f64) -> f64 + Sync + Send,
    kernel: &MollifierKernel,
) -> Result<CellField> {
    mollify_reflected(&phi.clone().with_dirichlet(boundary.clone()), kernel, f)
}
