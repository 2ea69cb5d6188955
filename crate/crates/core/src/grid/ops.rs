use super::{Boundary, CellField, FaceField, Side, UniformGrid};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Face value reconstruction used by the transport operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdvectionScheme {
    /// Arithmetic mean of the two adjacent cells (skew-symmetric for
    /// divergence-free transport).
    #[default]
    Centered,
    /// Upstream cell value (monotone, first order).
    Upwind,
}

/// Neighbours `(left, right)` across x-face `(i, j)`, ghosts at the walls.
#[inline]
fn x_pair(a: &CellField, nx: usize, i: usize, j: usize) -> (f64, f64) {
    let l = if i == 0 { a.ghost(Side::Left, j) } else { a.at(i - 1, j) };
    let r = if i == nx { a.ghost(Side::Right, j) } else { a.at(i, j) };
    (l, r)
}

#[inline]
fn y_pair(a: &CellField, ny: usize, i: usize, j: usize) -> (f64, f64) {
    let b = if j == 0 { a.ghost(Side::Bottom, i) } else { a.at(i, j - 1) };
    let t = if j == ny { a.ghost(Side::Top, i) } else { a.at(i, j) };
    (b, t)
}

fn build_faces(
    grid: &UniformGrid,
    a: &CellField,
    fx: impl Fn(usize, usize, f64, f64) -> f64,
    fy: impl Fn(usize, usize, f64, f64) -> f64,
) -> FaceField {
    assert!(a.matches(grid), "cell field does not match grid");
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut out = FaceField::zeros(grid);
    {
        let x = out.x_mut();
        for j in 0..ny {
            for i in 0..=nx {
                let (l, r) = x_pair(a, nx, i, j);
                x[j * (nx + 1) + i] = fx(i, j, l, r);
            }
        }
    }
    {
        let y = out.y_mut();
        for j in 0..=ny {
            for i in 0..nx {
                let (b, t) = y_pair(a, ny, i, j);
                y[j * nx + i] = fy(i, j, b, t);
            }
        }
    }
    out
}

/// Two-point difference across every face.
pub fn grad(grid: &UniformGrid, a: &CellField) -> FaceField {
    let (hx, hy) = (grid.hx(), grid.hy());
    build_faces(grid, a, |_, _, l, r| (r - l) / hx, |_, _, b, t| (t - b) / hy)
}

/// Arithmetic mean of the two cells adjacent to each face.
pub fn face_mean(grid: &UniformGrid, a: &CellField) -> FaceField {
    build_faces(grid, a, |_, _, l, r| 0.5 * (l + r), |_, _, b, t| 0.5 * (b + t))
}

/// Face values of `a` for transport by `flux` under `scheme`.
///
/// For upwinding, a boundary face fed from outside takes the boundary trace
/// of `a` (the Dirichlet value when one is attached).
pub fn face_values(
    grid: &UniformGrid,
    a: &CellField,
    flux: &FaceField,
    scheme: AdvectionScheme,
) -> FaceField {
    match scheme {
        AdvectionScheme::Centered => face_mean(grid, a),
        AdvectionScheme::Upwind => {
            let (nx, ny) = (grid.nx(), grid.ny());
            build_faces(
                grid,
                a,
                |i, j, l, r| {
                    let f = flux.at_x(i, j);
                    if i == 0 {
                        if f > 0.0 { a.trace(Side::Left, j) } else { r }
                    } else if i == nx {
                        if f < 0.0 { a.trace(Side::Right, j) } else { l }
                    } else if f >= 0.0 {
                        l
                    } else {
                        r
                    }
                },
                |i, j, b, t| {
                    let f = flux.at_y(i, j);
                    if j == 0 {
                        if f > 0.0 { a.trace(Side::Bottom, i) } else { t }
                    } else if j == ny {
                        if f < 0.0 { a.trace(Side::Top, i) } else { b }
                    } else if f >= 0.0 {
                        b
                    } else {
                        t
                    }
                },
            )
        }
    }
}

/// Net outward flux per unit cell area.
pub fn div(grid: &UniformGrid, w: &FaceField) -> CellField {
    assert!(w.matches(grid), "face field does not match grid");
    let (nx, ny) = (grid.nx(), grid.ny());
    let (hx, hy) = (grid.hx(), grid.hy());
    let mut values = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            values.push(
                (w.at_x(i + 1, j) - w.at_x(i, j)) / hx + (w.at_y(i, j + 1) - w.at_y(i, j)) / hy,
            );
        }
    }
    CellField::from_parts(nx, ny, values, Boundary::Free)
}

/// Five-point Laplacian `div(grad a)` with `a`'s ghost rule at the walls.
pub fn laplacian(grid: &UniformGrid, a: &CellField) -> CellField {
    div(grid, &grad(grid, a))
}

/// Divergence-form transport `div(flux * a_face)`.
pub fn advect_scalar(
    grid: &UniformGrid,
    flux: &FaceField,
    a: &CellField,
    scheme: AdvectionScheme,
) -> CellField {
    div(grid, &flux.mul(&face_values(grid, a, flux, scheme)))
}

/// Signed quadratic form `<advect_scalar(flux, a), a>`.
pub fn advection_form(
    grid: &UniformGrid,
    flux: &FaceField,
    a: &CellField,
    scheme: AdvectionScheme,
) -> f64 {
    grid.cell_dot(advect_scalar(grid, flux, a, scheme).values(), a.values())
}

fn is_zero_dirichlet(a: &CellField) -> bool {
    matches!(a.boundary(), Boundary::Dirichlet(t) if t.iter().all(|v| v == 0.0))
}

/// `|<grad a, w>_faces + <a, div w>_cells|` for zero-Dirichlet `a` and `w`
/// with zero normal trace.
pub fn sbp_check(grid: &UniformGrid, a: &CellField, w: &FaceField) -> Result<f64> {
    if !is_zero_dirichlet(a) {
        return Err(Error::Precondition(
            "summation-by-parts check needs a zero-Dirichlet scalar".into(),
        ));
    }
    if w.normal_trace_max() != 0.0 {
        return Err(Error::Precondition(format!(
            "summation-by-parts check needs zero normal trace, found {:e}",
            w.normal_trace_max()
        )));
    }
    let lhs = grid.face_dot(&grad(grid, a), w);
    let rhs = grid.cell_dot(a.values(), div(grid, w).values());
    Ok((lhs + rhs).abs())
}

/// `|<advect_scalar(flux, a), a>|` for the centered scheme, which vanishes
/// when `flux` is discretely divergence free.
pub fn skew_defect(grid: &UniformGrid, flux: &FaceField, a: &CellField) -> Result<f64> {
    let divergence = div(grid, flux).max_abs();
    if divergence > 1e-10 {
        return Err(Error::Precondition(format!(
            "transport is not divergence free: max |div F| = {divergence:e}"
        )));
    }
    let normal = flux.normal_trace_max();
    if normal > 1e-12 * flux.max_abs().max(1.0) {
        return Err(Error::Precondition(format!(
            "transport has normal boundary component {normal:e}"
        )));
    }
    if !is_zero_dirichlet(a) {
        return Err(Error::Precondition(
            "skew check needs a zero-Dirichlet scalar".into(),
        ));
    }
    Ok(advection_form(grid, flux, a, AdvectionScheme::Centered).abs())
}
