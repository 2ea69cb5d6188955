//! Variable-viscosity Stokes problem with transport on the staggered grid.
//!
//! Unknowns: x-velocity on interior vertical faces, y-velocity on interior
//! horizontal faces (the wall-normal components are zero), pressure at
//! cells. The tangential ghost across a wall is `-u`; transport across a
//! wall sees the exterior extended by zero.

use super::coefficients::{cell_coefficient, mollified_coefficient};
use super::{Context, FluxSolution, PhiSolution, SolverState};
use crate::error::{Error, Result};
use crate::grid::{div, face_mean, min_eigenvalue_inverse_iteration, Boundary, CellField, FaceField, UniformGrid};
use crate::linalg::{linear_solve, CsrMatrix, LinearSystem, UnknownMap};
use crate::par;
use crate::params::ModelParams;

/// Strong form of the viscous operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViscousForm {
    /// `-div(mu (grad u + grad u^T))`.
    Symmetric,
    /// `-div(mu grad u)` componentwise.
    Laplacian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesOptions {
    /// Replace the continuity equation of cell `(0, 0)` by `p = 0`.
    pub pin_pressure: bool,
}

impl Default for StokesOptions {
    fn default() -> Self {
        Self { pin_pressure: true }
    }
}

#[derive(Debug, Clone)]
pub struct StokesSolution {
    pub velocity: FaceField,
    /// Shifted to zero mean.
    pub pressure: CellField,
    pub linear_residual: f64,
    /// `max |div u|`.
    pub divergence: f64,
}

/// Unknown numbering of the saddle-point system.
#[derive(Debug, Clone, Copy)]
pub struct StokesIndex {
    nx: usize,
    ny: usize,
}

impl StokesIndex {
    pub fn new(grid: &UniformGrid) -> Self {
        Self {
            nx: grid.nx(),
            ny: grid.ny(),
        }
    }

    pub fn x_count(&self) -> usize {
        (self.nx - 1) * self.ny
    }

    pub fn y_count(&self) -> usize {
        self.nx * (self.ny - 1)
    }

    pub fn velocity_count(&self) -> usize {
        self.x_count() + self.y_count()
    }

    pub fn len(&self) -> usize {
        self.velocity_count() + self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// x-face `(i, j)` if it is an unknown.
    pub fn u(&self, i: i64, j: i64) -> Option<usize> {
        let (nx, ny) = (self.nx as i64, self.ny as i64);
        (i > 0 && i < nx && j >= 0 && j < ny).then(|| (j * (nx - 1) + i - 1) as usize)
    }

    pub fn v(&self, i: i64, j: i64) -> Option<usize> {
        let (nx, ny) = (self.nx as i64, self.ny as i64);
        (i >= 0 && i < nx && j > 0 && j < ny).then(|| self.x_count() + ((j - 1) * nx + i) as usize)
    }

    pub fn p(&self, i: usize, j: usize) -> usize {
        self.velocity_count() + j * self.nx + i
    }

    /// Split a solution vector into velocity and pressure fields.
    pub fn unpack(&self, x: &[f64]) -> (FaceField, Vec<f64>) {
        let (nx, ny) = (self.nx, self.ny);
        let mut xs = vec![0.0; (nx + 1) * ny];
        let mut ys = vec![0.0; nx * (ny + 1)];
        for j in 0..ny {
            for i in 1..nx {
                xs[j * (nx + 1) + i] = x[self.u(i as i64, j as i64).unwrap()];
            }
        }
        for j in 1..ny {
            for i in 0..nx {
                ys[j * nx + i] = x[self.v(i as i64, j as i64).unwrap()];
            }
        }
        let w = FaceField::from_vecs(nx, ny, xs, ys).expect("shapes agree");
        (w, x[self.velocity_count()..].to_vec())
    }

    /// Interior velocity components of `w` in unknown order.
    pub fn pack_velocity(&self, w: &FaceField) -> Vec<f64> {
        let mut out = vec![0.0; self.velocity_count()];
        for j in 0..self.ny {
            for i in 1..self.nx {
                out[self.u(i as i64, j as i64).unwrap()] = w.at_x(i, j);
            }
        }
        for j in 1..self.ny {
            for i in 0..self.nx {
                out[self.v(i as i64, j as i64).unwrap()] = w.at_y(i, j);
            }
        }
        out
    }
}

/// Sparse linear combination of unknowns.
type Lin = Vec<(usize, f64)>;

fn push(out: &mut Lin, term: &Lin, scale: f64) {
    out.extend(term.iter().map(|&(c, v)| (c, v * scale)));
}

struct Momentum<'a> {
    grid: &'a UniformGrid,
    idx: StokesIndex,
    mu: &'a CellField,
    form: ViscousForm,
    transport: Option<&'a FaceField>,
}

impl Momentum<'_> {
    /// x-velocity with the no-slip ghost rule (`-u` across the horizontal walls).
    fn u_val(&self, i: i64, j: i64) -> Lin {
        let ny = self.idx.ny as i64;
        let (jj, s) = if j < 0 {
            (0, -1.0)
        } else if j >= ny {
            (ny - 1, -1.0)
        } else {
            (j, 1.0)
        };
        self.idx.u(i, jj).map(|c| vec![(c, s)]).unwrap_or_default()
    }

    fn v_val(&self, i: i64, j: i64) -> Lin {
        let nx = self.idx.nx as i64;
        let (ii, s) = if i < 0 {
            (0, -1.0)
        } else if i >= nx {
            (nx - 1, -1.0)
        } else {
            (i, 1.0)
        };
        self.idx.v(ii, j).map(|c| vec![(c, s)]).unwrap_or_default()
    }

    fn mu_cell(&self, i: i64, j: i64) -> f64 {
        self.mu.at_or_ghost(i, j)
    }

    fn mu_node(&self, a: i64, b: i64) -> f64 {
        0.25 * (self.mu_cell(a - 1, b - 1) + self.mu_cell(a, b - 1) + self.mu_cell(a - 1, b) + self.mu_cell(a, b))
    }

    fn diff(&self, plus: Lin, minus: Lin, inv_h: f64) -> Lin {
        let mut out = Lin::new();
        push(&mut out, &plus, inv_h);
        push(&mut out, &minus, -inv_h);
        out
    }

    /// Normal stress of the x-momentum at cell `(a, j)`.
    fn sxx(&self, a: i64, j: i64) -> Lin {
        let ux = self.diff(self.u_val(a + 1, j), self.u_val(a, j), 1.0 / self.grid.hx());
        let factor = match self.form {
            ViscousForm::Symmetric => 2.0,
            ViscousForm::Laplacian => 1.0,
        };
        let mut out = Lin::new();
        push(&mut out, &ux, factor * self.mu_cell(a, j));
        out
    }

    fn syy(&self, i: i64, b: i64) -> Lin {
        let vy = self.diff(self.v_val(i, b + 1), self.v_val(i, b), 1.0 / self.grid.hy());
        let factor = match self.form {
            ViscousForm::Symmetric => 2.0,
            ViscousForm::Laplacian => 1.0,
        };
        let mut out = Lin::new();
        push(&mut out, &vy, factor * self.mu_cell(i, b));
        out
    }

    /// Shear stress at node `(a, b)` as seen by the x-momentum (`x_row`) or
    /// the y-momentum.
    fn sxy(&self, a: i64, b: i64, x_row: bool) -> Lin {
        let uy = self.diff(self.u_val(a, b), self.u_val(a, b - 1), 1.0 / self.grid.hy());
        let vx = self.diff(self.v_val(a, b), self.v_val(a - 1, b), 1.0 / self.grid.hx());
        let mu = self.mu_node(a, b);
        let mut out = Lin::new();
        match self.form {
            ViscousForm::Symmetric => {
                push(&mut out, &uy, mu);
                push(&mut out, &vx, mu);
            }
            ViscousForm::Laplacian => push(&mut out, if x_row { &uy } else { &vx }, mu),
        }
        out
    }

    /// Transported x-velocity: zero outside the unknowns.
    fn u_ext(&self, i: i64, j: i64) -> Lin {
        self.idx.u(i, j).map(|c| vec![(c, 1.0)]).unwrap_or_default()
    }

    fn v_ext(&self, i: i64, j: i64) -> Lin {
        self.idx.v(i, j).map(|c| vec![(c, 1.0)]).unwrap_or_default()
    }

    fn x_row(&self, i: i64, j: i64) -> Lin {
        let (ihx, ihy) = (1.0 / self.grid.hx(), 1.0 / self.grid.hy());
        let mut row = Lin::new();
        push(&mut row, &self.sxx(i, j), -ihx);
        push(&mut row, &self.sxx(i - 1, j), ihx);
        push(&mut row, &self.sxy(i, j + 1, true), -ihy);
        push(&mut row, &self.sxy(i, j, true), ihy);
        if let Some(g) = self.transport {
            let (iu, ju) = (i as usize, j as usize);
            let ue = 0.5 * (g.at_x(iu, ju) + g.at_x(iu + 1, ju));
            let uw = 0.5 * (g.at_x(iu - 1, ju) + g.at_x(iu, ju));
            let vn = 0.5 * (g.at_y(iu - 1, ju + 1) + g.at_y(iu, ju + 1));
            let vs = 0.5 * (g.at_y(iu - 1, ju) + g.at_y(iu, ju));
            let me = self.u_ext(i, j);
            for (flux, nb, inv_h) in [
                (ue, self.u_ext(i + 1, j), ihx),
                (-uw, self.u_ext(i - 1, j), ihx),
                (vn, self.u_ext(i, j + 1), ihy),
                (-vs, self.u_ext(i, j - 1), ihy),
            ] {
                push(&mut row, &me, 0.5 * flux * inv_h);
                push(&mut row, &nb, 0.5 * flux * inv_h);
            }
        }
        row
    }

    fn y_row(&self, i: i64, j: i64) -> Lin {
        let (ihx, ihy) = (1.0 / self.grid.hx(), 1.0 / self.grid.hy());
        let mut row = Lin::new();
        push(&mut row, &self.sxy(i + 1, j, false), -ihx);
        push(&mut row, &self.sxy(i, j, false), ihx);
        push(&mut row, &self.syy(i, j), -ihy);
        push(&mut row, &self.syy(i, j - 1), ihy);
        if let Some(g) = self.transport {
            let (iu, ju) = (i as usize, j as usize);
            let ue = 0.5 * (g.at_x(iu + 1, ju - 1) + g.at_x(iu + 1, ju));
            let uw = 0.5 * (g.at_x(iu, ju - 1) + g.at_x(iu, ju));
            let vn = 0.5 * (g.at_y(iu, ju) + g.at_y(iu, ju + 1));
            let vs = 0.5 * (g.at_y(iu, ju - 1) + g.at_y(iu, ju));
            let me = self.v_ext(i, j);
            for (flux, nb, inv_h) in [
                (ue, self.v_ext(i + 1, j), ihx),
                (-uw, self.v_ext(i - 1, j), ihx),
                (vn, self.v_ext(i, j + 1), ihy),
                (-vs, self.v_ext(i, j - 1), ihy),
            ] {
                push(&mut row, &me, 0.5 * flux * inv_h);
                push(&mut row, &nb, 0.5 * flux * inv_h);
            }
        }
        row
    }

    /// Momentum rows in velocity-unknown order.
    fn rows(&self) -> Vec<Lin> {
        let (nx, ny) = (self.idx.nx, self.idx.ny);
        let nxu = nx - 1;
        par::map_indexed(self.idx.velocity_count(), |r| {
            if r < self.idx.x_count() {
                let (i, j) = (r % nxu + 1, r / nxu);
                self.x_row(i as i64, j as i64)
            } else {
                let k = r - self.idx.x_count();
                let (i, j) = (k % nx, k / nx + 1);
                debug_assert!(j < ny);
                self.y_row(i as i64, j as i64)
            }
        })
    }
}

fn velocity_block(grid: &UniformGrid, mu: &CellField, form: ViscousForm) -> CsrMatrix {
    let m = Momentum {
        grid,
        idx: StokesIndex::new(grid),
        mu,
        form,
        transport: None,
    };
    let n = m.idx.velocity_count();
    let triplets = m
        .rows()
        .into_iter()
        .enumerate()
        .flat_map(|(r, row)| row.into_iter().map(move |(c, v)| (r, c, v)))
        .collect();
    CsrMatrix::from_triplets(n, n, triplets)
}

/// Componentwise five-point Laplacian on the velocity unknowns.
pub fn vector_laplacian(grid: &UniformGrid) -> CsrMatrix {
    velocity_block(grid, &CellField::constant(grid, 1.0), ViscousForm::Laplacian)
}

/// Discrete Korn constant: smallest `c` with
/// `<-div(D u), u> >= c ||grad u||^2` over all no-slip velocities, from
/// inverse iteration on the unit-viscosity blocks. An estimate.
pub fn korn_constant(grid: &UniformGrid) -> Result<f64> {
    let k = velocity_block(grid, &CellField::constant(grid, 1.0), ViscousForm::Symmetric);
    let l = vector_laplacian(grid);
    min_eigenvalue_inverse_iteration(&k, Some(&l), 1e-10, 2000)
}

/// Assemble the saddle-point system. `viscosity` is a cell field whose
/// ghost values are used at wall nodes; `rhs` supplies the momentum forcing
/// on interior faces.
pub fn stokes_system(
    grid: &UniformGrid,
    viscosity: &CellField,
    form: ViscousForm,
    transport: Option<&FaceField>,
    rhs: &FaceField,
    options: StokesOptions,
) -> LinearSystem {
    let idx = StokesIndex::new(grid);
    let m = Momentum {
        grid,
        idx,
        mu: viscosity,
        form,
        transport,
    };
    let (nx, ny) = (grid.nx(), grid.ny());
    let (ihx, ihy) = (1.0 / grid.hx(), 1.0 / grid.hy());
    let n = idx.len();
    let mut triplets = Vec::with_capacity(14 * n);
    let mut b = vec![0.0; n];
    let nvel = idx.velocity_count();
    for (r, row) in m.rows().into_iter().enumerate() {
        triplets.extend(row.into_iter().map(|(c, v)| (r, c, v)));
        if r < idx.x_count() {
            let (i, j) = (r % (nx - 1) + 1, r / (nx - 1));
            triplets.push((r, idx.p(i, j), ihx));
            triplets.push((r, idx.p(i - 1, j), -ihx));
            b[r] = rhs.at_x(i, j);
        } else {
            let k = r - idx.x_count();
            let (i, j) = (k % nx, k / nx + 1);
            triplets.push((r, idx.p(i, j), ihy));
            triplets.push((r, idx.p(i, j - 1), -ihy));
            b[r] = rhs.at_y(i, j);
        }
    }
    for j in 0..ny {
        for i in 0..nx {
            let r = idx.p(i, j);
            if options.pin_pressure && i == 0 && j == 0 {
                triplets.push((r, r, 1.0));
                continue;
            }
            let (ii, jj) = (i as i64, j as i64);
            for (c, s) in [
                (idx.u(ii + 1, jj), -ihx),
                (idx.u(ii, jj), ihx),
                (idx.v(ii, jj + 1), -ihy),
                (idx.v(ii, jj), ihy),
            ] {
                if let Some(c) = c {
                    triplets.push((r, c, s));
                }
            }
        }
    }
    debug_assert_eq!(nvel + nx * ny, n);
    LinearSystem::new(
        CsrMatrix::from_triplets(n, n, triplets),
        b,
        UnknownMap::Stokes { nx, ny },
    )
}

/// Momentum forcing `g - beta T e_g` on faces.
pub fn momentum_forcing(grid: &UniformGrid, temperature: &CellField, params: &ModelParams) -> FaceField {
    let c = &params.coefficients;
    let t = face_mean(grid, temperature);
    let (ex, ey) = c.gravity;
    let mut out = params.body_force.clone();
    out.x_mut().iter_mut().zip(t.x()).for_each(|(g, t)| *g -= c.beta * ex * t);
    out.y_mut().iter_mut().zip(t.y()).for_each(|(g, t)| *g -= c.beta * ey * t);
    out
}

/// Solve the saddle-point system and shift the pressure to zero mean.
pub fn solve_system(grid: &UniformGrid, system: &LinearSystem, ctx_solver: &crate::linalg::SolverOptions, pinned: bool) -> Result<StokesSolution> {
    let idx = StokesIndex::new(grid);
    let solution = match linear_solve(system, ctx_solver) {
        Err(Error::SingularMatrix { detail, .. }) if !pinned => {
            return Err(Error::PressureNullspace(format!(
                "pressure is determined only up to a constant; pin one cell ({detail})"
            )))
        }
        other => other?,
    };
    let (velocity, p) = idx.unpack(&solution.x);
    let mean = p.iter().sum::<f64>() / p.len() as f64;
    let pressure = CellField::from_parts(grid.nx(), grid.ny(), p.iter().map(|v| v - mean).collect(), Boundary::Free);
    Ok(StokesSolution {
        divergence: div(grid, &velocity).max_abs(),
        velocity,
        pressure,
        linear_residual: solution.residual,
    })
}

/// Solve for the new velocity and pressure.
pub fn solve_stokes(
    ctx: &Context,
    old: &SolverState,
    phi: &PhiSolution,
    flux: &FluxSolution,
    params: &ModelParams,
    options: StokesOptions,
) -> Result<StokesSolution> {
    let grid = ctx.grid();
    let mu = params.coefficients.viscosity;
    let mu_cells = mollified_coefficient(&old.phi, &params.boundary, |z| mu.eval(z), ctx.kernel())?;
    let carrier = phi.transport.add(&flux.total);
    let forcing = momentum_forcing(grid, &old.temperature, params);
    let system = stokes_system(grid, &mu_cells, ViscousForm::Symmetric, Some(&carrier), &forcing, options);
    solve_system(grid, &system, &ctx.solver, options.pin_pressure)
}

/// Unregularized viscosity `mu(phi)` with ghost values from the reflected
/// fraction.
pub(crate) fn plain_viscosity(phi: &CellField, params: &ModelParams) -> CellField {
    let mu = params.coefficients.viscosity;
    cell_coefficient(phi, |z| mu.eval(z))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn korn_constant_is_one() {
        let g = UniformGrid::unit_square(8).unwrap();
        let c = korn_constant(&g).unwrap();
        assert!((c - 1.0).abs() < 1e-6, "{c}");
    }

    #[test]
    fn unpinned_pressure_is_reported() {
        let g = UniformGrid::unit_square(6).unwrap();
        let mu = CellField::constant(&g, 1.0);
        let rhs = FaceField::from_fns(&g, |_, y| y, |x, _| x);
        let sys = stokes_system(&g, &mu, ViscousForm::Symmetric, None, &rhs, StokesOptions { pin_pressure: false });
        match solve_system(&g, &sys, &Default::default(), false) {
            Err(Error::PressureNullspace(_)) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn viscous_energy_matches_gradient_norm() {
        // unit viscosity, Laplacian form: <A u, u> = ||grad u||^2
        let g = UniformGrid::new(7, 6, (0.0, 0.0), (1.0, 0.8)).unwrap();
        let idx = StokesIndex::new(&g);
        let mut w = FaceField::from_fns(&g, |x, y| (3.0 * x).sin() + y * y, |x, y| x * y - 0.2);
        w.zero_normal_boundary();
        let u = idx.pack_velocity(&w);
        let a = vector_laplacian(&g);
        let form: f64 = a.matvec(&u).iter().zip(&u).map(|(a, b)| a * b).sum::<f64>() * g.cell_area();
        let norm = crate::grid::velocity_gradient_norm(&g, &w);
        assert!((form - norm * norm).abs() < 1e-10 * form, "{form} vs {}", norm * norm);
    }
}
