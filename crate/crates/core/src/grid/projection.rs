//! Discrete Helmholtz projection and harmonic extension of boundary data.

use super::ops::{div, grad};
use super::{Boundary, BoundaryTrace, CellField, FaceField, Side, UniformGrid};
use crate::error::{Error, Result};
use crate::linalg::{DirectSolver, TripletBuilder};

/// Factored pure-Neumann cell Laplacian used to remove gradients from a
/// face field. The pressure-like potential is pinned at cell `(0, 0)`.
#[derive(Debug)]
pub struct Projector {
    grid: UniformGrid,
    solver: DirectSolver,
}

impl Projector {
    pub fn new(grid: &UniformGrid) -> Result<Self> {
        let (nx, ny) = (grid.nx(), grid.ny());
        let (ax, ay) = (1.0 / (grid.hx() * grid.hx()), 1.0 / (grid.hy() * grid.hy()));
        let n = grid.cell_count();
        let mut b = TripletBuilder::new(n, n);
        b.add(0, 0, 1.0);
        for j in 0..ny {
            for i in 0..nx {
                let r = grid.cell(i, j);
                if r == 0 {
                    continue;
                }
                let mut d = 0.0;
                let mut link = |c: usize, w: f64| {
                    b.add(r, c, -w);
                    d += w;
                };
                if i > 0 {
                    link(grid.cell(i - 1, j), ax);
                }
                if i + 1 < nx {
                    link(grid.cell(i + 1, j), ax);
                }
                if j > 0 {
                    link(grid.cell(i, j - 1), ay);
                }
                if j + 1 < ny {
                    link(grid.cell(i, j + 1), ay);
                }
                b.add(r, r, d);
            }
        }
        Ok(Self {
            grid: *grid,
            solver: DirectSolver::factor(&b.build())?,
        })
    }

    /// Component of `w` (normal boundary values dropped) that is discretely
    /// divergence free, orthogonal to cell gradients in the face inner
    /// product.
    pub fn project(&self, w: &FaceField) -> Result<FaceField> {
        if !w.matches(&self.grid) {
            return Err(Error::Shape("face field does not match projector grid".into()));
        }
        let mut w = w.clone();
        w.zero_normal_boundary();
        let mut rhs: Vec<f64> = div(&self.grid, &w).values().iter().map(|v| -v).collect();
        rhs[0] = 0.0;
        let (q, _) = self.solver.solve(&rhs);
        let q = CellField::from_parts(self.grid.nx(), self.grid.ny(), q, Boundary::Free);
        let mut out = w.sub(&grad(&self.grid, &q));
        out.zero_normal_boundary();
        Ok(out)
    }
}

/// One-shot [`Projector::project`].
pub fn leray_project(grid: &UniformGrid, w: &FaceField) -> Result<FaceField> {
    Projector::new(grid)?.project(w)
}

/// Discrete harmonic function with Dirichlet trace `trace` in `[0, 1]`.
pub fn harmonic_extension(grid: &UniformGrid, trace: &BoundaryTrace) -> Result<CellField> {
    if !trace.matches(grid) {
        return Err(Error::Shape("boundary trace does not match grid".into()));
    }
    trace.check_unit_range()?;
    let (nx, ny) = (grid.nx(), grid.ny());
    let (ax, ay) = (1.0 / (grid.hx() * grid.hx()), 1.0 / (grid.hy() * grid.hy()));
    let n = grid.cell_count();
    let mut b = TripletBuilder::new(n, n);
    let mut rhs = vec![0.0; n];
    for j in 0..ny {
        for i in 0..nx {
            let r = grid.cell(i, j);
            let mut d = 0.0;
            let mut neighbour = |nb: Option<usize>, w: f64, side: Side, k: usize| {
                match nb {
                    Some(c) => {
                        b.add(r, c, -w);
                        d += w;
                    }
                    None => {
                        d += 2.0 * w;
                        rhs[r] += 2.0 * w * trace.get(side, k);
                    }
                }
            };
            neighbour((i > 0).then(|| grid.cell(i - 1, j)), ax, Side::Left, j);
            neighbour((i + 1 < nx).then(|| grid.cell(i + 1, j)), ax, Side::Right, j);
            neighbour((j > 0).then(|| grid.cell(i, j - 1)), ay, Side::Bottom, i);
            neighbour((j + 1 < ny).then(|| grid.cell(i, j + 1)), ay, Side::Top, i);
            b.add(r, r, d);
        }
    }
    let solver = DirectSolver::factor(&b.build())?;
    let (x, _) = solver.solve(&rhs);
    Ok(CellField::from_parts(nx, ny, x, Boundary::Free).with_dirichlet(trace.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::laplacian;

    #[test]
    fn projection_is_divergence_free_and_idempotent() {
        let g = UniformGrid::new(12, 10, (0.0, 0.0), (1.2, 1.0)).unwrap();
        let w = FaceField::from_fns(&g, |x, y| (3.0 * x).sin() * y, |x, y| x * x - y);
        let p = Projector::new(&g).unwrap();
        let pw = p.project(&w).unwrap();
        assert!(div(&g, &pw).max_abs() < 1e-10);
        assert_eq!(pw.normal_trace_max(), 0.0);
        let ppw = p.project(&pw).unwrap();
        assert!(ppw.sub(&pw).max_abs() < 1e-10);
    }

    #[test]
    fn projection_removes_gradients() {
        let g = UniformGrid::unit_square(10).unwrap();
        let q = CellField::from_fn(&g, |x, y| (x * y).cos());
        let gq = grad(&g, &q);
        let out = leray_project(&g, &gq).unwrap();
        assert!(out.max_abs() < 1e-10, "{}", out.max_abs());
    }

    #[test]
    fn harmonic_extension_reproduces_linear_data() {
        let g = UniformGrid::unit_square(8).unwrap();
        let f = |x: f64, y: f64| 0.2 + 0.3 * x + 0.4 * y;
        let ext = harmonic_extension(&g, &BoundaryTrace::from_fn(&g, f)).unwrap();
        for j in 0..8 {
            for i in 0..8 {
                let (x, y) = g.cell_center(i, j);
                assert!((ext.at(i, j) - f(x, y)).abs() < 1e-12);
            }
        }
        assert!(laplacian(&g, &ext).max_abs() < 1e-9);
    }

    #[test]
    fn harmonic_extension_checks_range() {
        let g = UniformGrid::unit_square(6).unwrap();
        assert!(harmonic_extension(&g, &BoundaryTrace::constant(&g, 1.5)).is_err());
    }
}
