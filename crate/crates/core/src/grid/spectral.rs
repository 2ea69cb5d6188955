use super::UniformGrid;
use crate::error::{Error, Result};
use crate::linalg::{norm2, CsrMatrix, DirectSolver};

/// Smallest eigenvalue of the cell-centred five-point Dirichlet Laplacian
/// (ghost reflection). The staggered velocity components share it.
pub fn analytic_min_eigenvalue(grid: &UniformGrid) -> f64 {
    let sx = (std::f64::consts::PI / (2.0 * grid.nx() as f64)).sin();
    let sy = (std::f64::consts::PI / (2.0 * grid.ny() as f64)).sin();
    4.0 * sx * sx / (grid.hx() * grid.hx()) + 4.0 * sy * sy / (grid.hy() * grid.hy())
}

/// Discrete Poincaré constant `||a|| <= C ||grad a||` for zero boundary data.
pub fn poincare_constant(grid: &UniformGrid) -> f64 {
    1.0 / analytic_min_eigenvalue(grid).sqrt()
}

/// Smallest eigenvalue of `A x = lambda M x` (`M = I` when `None`) for
/// symmetric positive definite `A`, `M`, by inverse iteration.
pub fn min_eigenvalue_inverse_iteration(
    a: &CsrMatrix,
    m: Option<&CsrMatrix>,
    tol: f64,
    max_iterations: usize,
) -> Result<f64> {
    let n = a.nrows();
    let lu = DirectSolver::factor(a)?;
    let apply_m = |x: &[f64]| match m {
        Some(m) => m.matvec(x),
        None => x.to_vec(),
    };
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    // Deterministic start with components along every smooth mode.
    let mut x: Vec<f64> = (0..n).map(|k| 1.0 + 0.1 * ((k as f64) * 0.7).sin()).collect();
    let mut lambda = f64::INFINITY;
    for _ in 0..max_iterations {
        let (y, _) = lu.solve(&apply_m(&x));
        let my = apply_m(&y);
        let scale = dot(&y, &my).sqrt();
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::NonFinite("inverse iteration"));
        }
        x = y.iter().map(|v| v / scale).collect();
        let next = dot(&x, &a.matvec(&x)) / dot(&x, &apply_m(&x));
        if (next - lambda).abs() <= tol * next.abs() {
            return Ok(next);
        }
        lambda = next;
    }
    Err(Error::IterationCap {
        iterations: max_iterations,
        residual: norm2(&x),
    })
}
