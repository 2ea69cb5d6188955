use super::ops::grad;
use super::{CellField, FaceField, UniformGrid};
use serde::{Deserialize, Serialize};

/// Discrete `L2`, `H1` seminorm and max norm of a field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub l2: f64,
    pub h1_semi: f64,
    pub linf: f64,
}

/// Norms of a cell scalar; the gradient uses the field's own boundary rule.
pub fn cell_norms(grid: &UniformGrid, a: &CellField) -> Norms {
    let g = grad(grid, a);
    Norms {
        l2: grid.cell_dot(a.values(), a.values()).sqrt(),
        h1_semi: grid.face_dot(&g, &g).sqrt(),
        linf: a.max_abs(),
    }
}

/// Norms of a face vector field vanishing on the walls.
pub fn face_norms(grid: &UniformGrid, w: &FaceField) -> Norms {
    Norms {
        l2: grid.face_dot(w, w).sqrt(),
        h1_semi: velocity_gradient_norm(grid, w),
        linf: w.max_abs(),
    }
}

/// `||grad u||` for a staggered velocity with no-slip walls.
///
/// Normal derivatives sit at cell centres, tangential ones at grid nodes;
/// the tangential ghost across a wall is `-u`. Node weights are halved on
/// each boundary line they touch, matching the five-point vector Laplacian:
/// the squared norm equals `<-Lap u, u>` in the face inner product.
pub fn velocity_gradient_norm(grid: &UniformGrid, w: &FaceField) -> f64 {
    let (nx, ny) = (grid.nx(), grid.ny());
    let (hx, hy) = (grid.hx(), grid.hy());
    let area = grid.cell_area();
    let half = |k: usize, n: usize| if k == 0 || k == n { 0.5 } else { 1.0 };
    let mut sum = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            let ux = (w.at_x(i + 1, j) - w.at_x(i, j)) / hx;
            let vy = (w.at_y(i, j + 1) - w.at_y(i, j)) / hy;
            sum += area * (ux * ux + vy * vy);
        }
    }
    for j in 0..=ny {
        for i in 0..=nx {
            let weight = area * half(i, nx) * half(j, ny);
            if i <= nx && j <= ny {
                let below = if j == 0 { None } else { Some(w.at_x(i, j - 1)) };
                let above = if j == ny { None } else { Some(w.at_x(i, j)) };
                let uy = match (below, above) {
                    (Some(b), Some(a)) => (a - b) / hy,
                    (None, Some(a)) => 2.0 * a / hy,
                    (Some(b), None) => -2.0 * b / hy,
                    (None, None) => 0.0,
                };
                let left = if i == 0 { None } else { Some(w.at_y(i - 1, j)) };
                let right = if i == nx { None } else { Some(w.at_y(i, j)) };
                let vx = match (left, right) {
                    (Some(l), Some(r)) => (r - l) / hx,
                    (None, Some(r)) => 2.0 * r / hx,
                    (Some(l), None) => -2.0 * l / hx,
                    (None, None) => 0.0,
                };
                sum += weight * (uy * uy + vx * vx);
            }
        }
    }
    sum.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BoundaryTrace;
    use std::f64::consts::PI;

    #[test]
    fn cell_norms_of_sine() {
        let g = UniformGrid::unit_square(64).unwrap();
        let f = |x: f64, y: f64| (PI * x).sin() * (PI * y).sin();
        let a = CellField::from_fn(&g, f).with_dirichlet(BoundaryTrace::zeros(&g));
        let n = cell_norms(&g, &a);
        assert!((n.l2 - 0.5).abs() < 1e-3);
        assert!((n.h1_semi - PI / 2f64.sqrt()).abs() < 1e-2);
        assert!(n.linf <= 1.0);
    }

    #[test]
    fn velocity_norm_converges() {
        // u = (sin(pi x) sin(pi y), 0): ||grad u||^2 = pi^2 / 2.
        let g = UniformGrid::unit_square(64).unwrap();
        let w = FaceField::from_fns(&g, |x, y| (PI * x).sin() * (PI * y).sin(), |_, _| 0.0);
        let n = face_norms(&g, &w);
        assert!((n.h1_semi - PI / 2f64.sqrt()).abs() < 1e-2, "{}", n.h1_semi);
    }
}
