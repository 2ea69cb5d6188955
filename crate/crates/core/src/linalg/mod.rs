//! Sparse assembly and linear solvers.
//!
//! Systems up to [`SolverOptions::direct_limit`] unknowns are solved by a
//! sparse LU factorization; larger ones fall back to ILU(0)-preconditioned
//! restarted GMRES.

mod direct;
mod krylov;
mod sparse;

pub use direct::DirectSolver;
pub use krylov::{gmres, Ilu0, KrylovOutcome};
pub use sparse::{CsrMatrix, LinearSystem, TripletBuilder, UnknownMap};
pub(crate) use sparse::norm2;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Largest system handed to the direct solver.
    pub direct_limit: usize,
    /// Relative residual target for the iterative path.
    pub tolerance: f64,
    pub restart: usize,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            direct_limit: 200_000,
            tolerance: 1e-10,
            restart: 60,
            max_iterations: 5_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Direct,
    Gmres { iterations: usize },
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<f64>,
    /// Relative residual `||b - A x|| / ||b||`.
    pub residual: f64,
    pub method: SolveMethod,
}

/// Solve `system` with the direct or iterative path chosen by size.
pub fn linear_solve(system: &LinearSystem, options: &SolverOptions) -> Result<Solution> {
    if system.rhs.len() != system.matrix.nrows() {
        return Err(Error::Shape(format!(
            "rhs has {} entries for {} rows",
            system.rhs.len(),
            system.matrix.nrows()
        )));
    }
    if system.rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("right-hand side"));
    }
    let solution = if system.len() <= options.direct_limit {
        let lu = DirectSolver::factor(&system.matrix)?;
        let (x, residual) = lu.solve(&system.rhs);
        Solution {
            x,
            residual,
            method: SolveMethod::Direct,
        }
    } else {
        let ilu = Ilu0::new(&system.matrix)?;
        let out = gmres(
            &system.matrix,
            &system.rhs,
            &ilu,
            options.tolerance,
            options.restart,
            options.max_iterations,
        )?;
        Solution {
            x: out.x,
            residual: out.residual,
            method: SolveMethod::Gmres {
                iterations: out.iterations,
            },
        }
    };
    if solution.x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("linear solution"));
    }
    Ok(solution)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poisson_1d(n: usize) -> CsrMatrix {
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            b.add(i, i, 2.0);
            if i > 0 {
                b.add(i, i - 1, -1.0);
            }
            if i + 1 < n {
                b.add(i, i + 1, -1.0);
            }
        }
        b.build()
    }

    #[test]
    fn direct_solves_tridiagonal() {
        let a = poisson_1d(50);
        let x_true: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.matvec(&x_true);
        let sys = LinearSystem::new(a, b, UnknownMap::Generic);
        let sol = linear_solve(&sys, &SolverOptions::default()).unwrap();
        assert_eq!(sol.method, SolveMethod::Direct);
        let err = sol.x.iter().zip(&x_true).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn gmres_fallback_matches_direct() {
        let a = poisson_1d(300);
        let b: Vec<f64> = (0..300).map(|i| 1.0 + (i % 7) as f64).collect();
        let sys = LinearSystem::new(a, b, UnknownMap::Generic);
        let direct = linear_solve(&sys, &SolverOptions::default()).unwrap();
        let opts = SolverOptions {
            direct_limit: 10,
            tolerance: 1e-12,
            ..SolverOptions::default()
        };
        let iterative = linear_solve(&sys, &opts).unwrap();
        assert!(matches!(iterative.method, SolveMethod::Gmres { .. }));
        let scale = direct.x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = direct.x.iter().zip(&iterative.x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8 * scale, "{err}");
    }

    #[test]
    fn singular_matrix_is_reported() {
        // Neumann Laplacian: constants span the kernel.
        let n = 20;
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            let mut d = 0.0;
            if i > 0 {
                b.add(i, i - 1, -1.0);
                d += 1.0;
            }
            if i + 1 < n {
                b.add(i, i + 1, -1.0);
                d += 1.0;
            }
            b.add(i, i, d);
        }
        let sys = LinearSystem::new(b.build(), vec![1.0; n], UnknownMap::Generic);
        match linear_solve(&sys, &SolverOptions::default()) {
            Err(Error::SingularMatrix { .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ilu_is_exact_for_tridiagonal() {
        let a = poisson_1d(12);
        let ilu = Ilu0::new(&a).unwrap();
        let b: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let x = ilu.apply(&b);
        let r = a.residual(&x, &b);
        assert!(norm2(&r) < 1e-10);
    }
}
