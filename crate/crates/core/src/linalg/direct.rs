use super::sparse::{norm2, relative_residual, CsrMatrix};
use crate::error::{Error, Result};
use faer::prelude::*;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Growth `||A|| ||x|| / ||r||` above which a probe solve declares the
/// matrix numerically singular.
const SINGULAR_GROWTH: f64 = 1e13;

/// Sparse LU factorization with partial pivoting (faer).
pub struct DirectSolver {
    matrix: CsrMatrix,
    lu: Lu<usize, f64>,
}

impl std::fmt::Debug for DirectSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DirectSolver")
            .field("n", &self.matrix.nrows())
            .field("nnz", &self.matrix.nnz())
            .finish()
    }
}

impl DirectSolver {
    /// Factor `a` and probe it for numerical singularity with one solve
    /// against a fixed pseudo-random right-hand side.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Shape(format!(
                "matrix is {} x {}",
                a.nrows(),
                a.ncols()
            )));
        }
        if !a.is_finite() {
            return Err(Error::NonFinite("system matrix"));
        }
        let n = a.nrows();
        let mut triplets = Vec::with_capacity(a.nnz());
        for r in 0..n {
            for (c, v) in a.row(r) {
                triplets.push(Triplet::new(r, c, v));
            }
        }
        let csc = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| Error::Shape(format!("{e:?}")))?;
        // faer panics on an exactly zero pivot instead of returning an error.
        let lu = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| csc.sp_lu()))
            .map_err(|_| Error::SingularMatrix {
                detail: "zero pivot during factorization".into(),
                residual: f64::NAN,
            })?
            .map_err(|e| Error::SingularMatrix {
                detail: format!("structurally singular: {e}"),
                residual: f64::NAN,
            })?;
        let solver = Self {
            matrix: a.clone(),
            lu,
        };

        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let probe: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = solver.solve_raw(&probe);
        let xmax = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let rmax = probe.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let growth = a.norm_inf() * xmax / rmax;
        if !growth.is_finite() || growth > SINGULAR_GROWTH {
            let residual = relative_residual(a, &x, &probe);
            return Err(Error::SingularMatrix {
                detail: format!("numerically singular, solution growth {growth:e}"),
                residual,
            });
        }
        Ok(solver)
    }

    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.nrows() == 0
    }

    fn solve_raw(&self, b: &[f64]) -> Vec<f64> {
        let rhs = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
        let x = self.lu.solve(&rhs);
        (0..b.len()).map(|i| x[(i, 0)]).collect()
    }

    /// Solve with up to two steps of iterative refinement; returns the
    /// solution and the relative residual reached.
    pub fn solve(&self, b: &[f64]) -> (Vec<f64>, f64) {
        let mut x = self.solve_raw(b);
        let nb = norm2(b);
        let mut res = relative_residual(&self.matrix, &x, b);
        for _ in 0..2 {
            if res <= 1e-14 || nb == 0.0 {
                break;
            }
            let r = self.matrix.residual(&x, b);
            let dx = self.solve_raw(&r);
            let candidate: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a - d).collect();
            let cres = relative_residual(&self.matrix, &candidate, b);
            if cres < res {
                x = candidate;
                res = cres;
            } else {
                break;
            }
        }
        (x, res)
    }
}
