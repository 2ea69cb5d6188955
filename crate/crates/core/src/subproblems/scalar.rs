//! Cell-centred advection-diffusion systems
//! `-div(kappa grad a) + div(G a_face) = source` with Dirichlet data.

use crate::grid::{AdvectionScheme, BoundaryTrace, CellField, FaceField, Side, UniformGrid};
use crate::linalg::{CsrMatrix, LinearSystem, UnknownMap};
use crate::par;

/// Data of one scalar problem. All face fields are on `grid`.
#[derive(Debug, Clone, Copy)]
pub struct ScalarProblem<'a> {
    /// Diffusivity on faces.
    pub diffusivity: &'a FaceField,
    /// Transporting flux, if any.
    pub transport: Option<&'a FaceField>,
    pub scheme: AdvectionScheme,
    /// Dirichlet values on the boundary faces.
    pub boundary: &'a BoundaryTrace,
    /// Cell source (strong form).
    pub source: &'a [f64],
}

/// Transported face value across a wall: the mean of the interior cell and
/// the boundary value (the exterior is extended by the boundary data), or
/// the upstream value under upwinding.
#[inline]
fn wall_value(interior: f64, boundary: f64, outflow: f64, scheme: AdvectionScheme) -> f64 {
    match scheme {
        AdvectionScheme::Centered => 0.5 * (interior + boundary),
        AdvectionScheme::Upwind => {
            if outflow > 0.0 {
                interior
            } else {
                boundary
            }
        }
    }
}

/// Weights `(on_self, on_neighbour)` of the transported value across an
/// interior face with outward flux `outflow`.
#[inline]
fn interior_weights(outflow: f64, scheme: AdvectionScheme) -> (f64, f64) {
    match scheme {
        AdvectionScheme::Centered => (0.5, 0.5),
        AdvectionScheme::Upwind => {
            if outflow >= 0.0 {
                (1.0, 0.0)
            } else {
                (0.0, 1.0)
            }
        }
    }
}

struct FaceRef {
    /// Neighbouring cell, `None` across a wall.
    neighbour: Option<usize>,
    side: Side,
    k: usize,
    kappa: f64,
    /// Flux leaving the cell through this face.
    outflow: f64,
    inv_h: f64,
}

fn cell_faces(grid: &UniformGrid, p: &ScalarProblem<'_>, i: usize, j: usize) -> [FaceRef; 4] {
    let (nx, ny) = (grid.nx(), grid.ny());
    let (ix, iy) = (1.0 / grid.hx(), 1.0 / grid.hy());
    let g = |f: &dyn Fn(&FaceField) -> f64| p.transport.map_or(0.0, f);
    [
        FaceRef {
            neighbour: (i > 0).then(|| grid.cell(i - 1, j)),
            side: Side::Left,
            k: j,
            kappa: p.diffusivity.at_x(i, j),
            outflow: -g(&|t| t.at_x(i, j)),
            inv_h: ix,
        },
        FaceRef {
            neighbour: (i + 1 < nx).then(|| grid.cell(i + 1, j)),
            side: Side::Right,
            k: j,
            kappa: p.diffusivity.at_x(i + 1, j),
            outflow: g(&|t| t.at_x(i + 1, j)),
            inv_h: ix,
        },
        FaceRef {
            neighbour: (j > 0).then(|| grid.cell(i, j - 1)),
            side: Side::Bottom,
            k: i,
            kappa: p.diffusivity.at_y(i, j),
            outflow: -g(&|t| t.at_y(i, j)),
            inv_h: iy,
        },
        FaceRef {
            neighbour: (j + 1 < ny).then(|| grid.cell(i, j + 1)),
            side: Side::Top,
            k: i,
            kappa: p.diffusivity.at_y(i, j + 1),
            outflow: g(&|t| t.at_y(i, j + 1)),
            inv_h: iy,
        },
    ]
}

/// Assemble the system; unknowns are the cell values.
pub fn assemble_scalar(grid: &UniformGrid, p: &ScalarProblem<'_>) -> LinearSystem {
    assert!(p.diffusivity.matches(grid) && p.boundary.matches(grid));
    assert_eq!(p.source.len(), grid.cell_count());
    let nx = grid.nx();
    let rows = par::map_indexed(grid.cell_count(), |r| {
        let (i, j) = (r % nx, r / nx);
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(5);
        let mut diag = 0.0;
        let mut rhs = p.source[r];
        for f in cell_faces(grid, p, i, j) {
            let d = f.kappa * f.inv_h * f.inv_h;
            let q = f.outflow * f.inv_h;
            match f.neighbour {
                Some(c) => {
                    let (ws, wn) = interior_weights(f.outflow, p.scheme);
                    diag += d + q * ws;
                    entries.push((c, -d + q * wn));
                }
                None => {
                    let b = f.boundary_value(p.boundary);
                    // ghost = 2 b - a for the diffusive flux
                    diag += 2.0 * d;
                    rhs += 2.0 * d * b;
                    match p.scheme {
                        AdvectionScheme::Centered => {
                            diag += 0.5 * q;
                            rhs -= 0.5 * q * b;
                        }
                        AdvectionScheme::Upwind => {
                            if f.outflow > 0.0 {
                                diag += q;
                            } else {
                                rhs -= q * b;
                            }
                        }
                    }
                }
            }
        }
        entries.push((r, diag));
        (entries, rhs)
    });
    let n = grid.cell_count();
    let mut triplets = Vec::with_capacity(5 * n);
    let mut rhs = Vec::with_capacity(n);
    for (r, (entries, b)) in rows.into_iter().enumerate() {
        triplets.extend(entries.into_iter().map(|(c, v)| (r, c, v)));
        rhs.push(b);
    }
    let matrix = CsrMatrix::from_triplets(n, n, triplets);
    LinearSystem::new(
        matrix,
        rhs,
        UnknownMap::Cells {
            nx: grid.nx(),
            ny: grid.ny(),
        },
    )
}

impl FaceRef {
    fn boundary_value(&self, trace: &BoundaryTrace) -> f64 {
        trace.get(self.side, self.k)
    }
}

/// Face values of `a` used by the transport term of [`assemble_scalar`]:
/// interior faces as in the scheme, wall faces from the boundary value
/// `a.trace`.
pub fn transport_face_values(
    grid: &UniformGrid,
    a: &CellField,
    flux: &FaceField,
    scheme: AdvectionScheme,
) -> FaceField {
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut out = FaceField::zeros(grid);
    {
        let x = out.x_mut();
        for j in 0..ny {
            for i in 0..=nx {
                let f = flux.at_x(i, j);
                x[grid.xface(i, j)] = if i == 0 {
                    wall_value(a.at(0, j), a.trace(Side::Left, j), -f, scheme)
                } else if i == nx {
                    wall_value(a.at(nx - 1, j), a.trace(Side::Right, j), f, scheme)
                } else {
                    let (wl, wr) = interior_weights(f, scheme);
                    wl * a.at(i - 1, j) + wr * a.at(i, j)
                };
            }
        }
    }
    {
        let y = out.y_mut();
        for j in 0..=ny {
            for i in 0..nx {
                let f = flux.at_y(i, j);
                y[grid.yface(i, j)] = if j == 0 {
                    wall_value(a.at(i, 0), a.trace(Side::Bottom, i), -f, scheme)
                } else if j == ny {
                    wall_value(a.at(i, ny - 1), a.trace(Side::Top, i), f, scheme)
                } else {
                    let (wb, wt) = interior_weights(f, scheme);
                    wb * a.at(i, j - 1) + wt * a.at(i, j)
                };
            }
        }
    }
    out
}

/// `div(flux * a_face)` with the wall rule of [`transport_face_values`].
pub fn transport(
    grid: &UniformGrid,
    flux: &FaceField,
    a: &CellField,
    scheme: AdvectionScheme,
) -> CellField {
    crate::grid::div(grid, &flux.mul(&transport_face_values(grid, a, flux, scheme)))
}
