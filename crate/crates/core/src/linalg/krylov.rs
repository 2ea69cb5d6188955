//! Restarted GMRES with an ILU(0) right preconditioner.

use super::sparse::{norm2, CsrMatrix};
use crate::error::{Error, Result};

/// Incomplete LU with the sparsity pattern of `A`.
///
/// Zero pivots (saddle-point blocks) are replaced by a small multiple of
/// the row norm.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let (rp, ci, vals) = a.raw();
        let n = a.nrows();
        let row_ptr = rp.to_vec();
        let col_idx = ci.to_vec();
        let mut values = vals.to_vec();
        let mut diag = vec![usize::MAX; n];
        for r in 0..n {
            for k in row_ptr[r]..row_ptr[r + 1] {
                if col_idx[k] == r {
                    diag[r] = k;
                }
            }
            if diag[r] == usize::MAX {
                return Err(Error::SingularMatrix {
                    detail: format!("ILU(0) needs a stored diagonal in row {r}"),
                    residual: f64::NAN,
                });
            }
        }
        let row_scale: Vec<f64> = (0..n)
            .map(|r| values[row_ptr[r]..row_ptr[r + 1]].iter().map(|v| v.abs()).sum::<f64>())
            .collect();
        let mut position = vec![usize::MAX; n];
        for r in 0..n {
            for k in row_ptr[r]..row_ptr[r + 1] {
                position[col_idx[k]] = k;
            }
            for k in row_ptr[r]..row_ptr[r + 1] {
                let c = col_idx[k];
                if c >= r {
                    break;
                }
                let pivot = values[diag[c]];
                let factor = values[k] / pivot;
                values[k] = factor;
                for kk in diag[c] + 1..row_ptr[c + 1] {
                    let p = position[col_idx[kk]];
                    if p != usize::MAX {
                        values[p] -= factor * values[kk];
                    }
                }
            }
            let d = diag[r];
            if values[d].abs() < 1e-12 * row_scale[r].max(f64::MIN_POSITIVE) {
                values[d] = 1e-8 * row_scale[r].max(1.0);
            }
            for k in row_ptr[r]..row_ptr[r + 1] {
                position[col_idx[k]] = usize::MAX;
            }
        }
        Ok(Self {
            row_ptr,
            col_idx,
            values,
            diag,
        })
    }

    /// Solve `L U z = r`.
    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let n = r.len();
        let mut z = r.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for k in self.row_ptr[i]..self.diag[i] {
                s -= self.values[k] * z[self.col_idx[k]];
            }
            z[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in self.diag[i] + 1..self.row_ptr[i + 1] {
                s -= self.values[k] * z[self.col_idx[k]];
            }
            z[i] = s / self.values[self.diag[i]];
        }
        z
    }
}

#[derive(Debug, Clone)]
pub struct KrylovOutcome {
    pub x: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Right-preconditioned GMRES(`restart`) on `A x = b` to relative residual
/// `tol`.
pub fn gmres(
    a: &CsrMatrix,
    b: &[f64],
    precond: &Ilu0,
    tol: f64,
    restart: usize,
    max_iterations: usize,
) -> Result<KrylovOutcome> {
    let n = b.len();
    let nb = norm2(b);
    let mut x = vec![0.0; n];
    if nb == 0.0 {
        return Ok(KrylovOutcome {
            x,
            residual: 0.0,
            iterations: 0,
        });
    }
    let m = restart.max(1);
    let mut iterations = 0;
    let mut residual;
    loop {
        let r: Vec<f64> = a.residual(&x, b).iter().map(|v| -v).collect();
        let beta = norm2(&r);
        residual = beta / nb;
        if residual <= tol {
            break;
        }
        if iterations >= max_iterations {
            return Err(Error::IterationCap {
                iterations,
                residual,
            });
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut hess = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            let z = precond.apply(&basis[k]);
            let mut w = a.matvec(&z);
            for (i, v) in basis.iter().enumerate() {
                let hik: f64 = w.iter().zip(v).map(|(a, b)| a * b).sum();
                hess[i][k] = hik;
                w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= hik * vi);
            }
            let hnext = norm2(&w);
            hess[k + 1][k] = hnext;
            for i in 0..k {
                let t = cs[i] * hess[i][k] + sn[i] * hess[i + 1][k];
                hess[i + 1][k] = -sn[i] * hess[i][k] + cs[i] * hess[i + 1][k];
                hess[i][k] = t;
            }
            let denom = (hess[k][k].powi(2) + hess[k + 1][k].powi(2)).sqrt();
            if denom == 0.0 {
                k_used = k;
                break;
            }
            cs[k] = hess[k][k] / denom;
            sn[k] = hess[k + 1][k] / denom;
            hess[k][k] = denom;
            hess[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            iterations += 1;
            if g[k + 1].abs() / nb <= tol || hnext == 0.0 || iterations >= max_iterations {
                break;
            }
            basis.push(w.iter().map(|v| v / hnext).collect());
        }
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= hess[i][j] * y[j];
            }
            y[i] = s / hess[i][i];
        }
        let mut update = vec![0.0; n];
        for (yi, v) in y.iter().zip(&basis) {
            update.iter_mut().zip(v).for_each(|(u, vi)| *u += yi * vi);
        }
        let dz = precond.apply(&update);
        x.iter_mut().zip(&dz).for_each(|(xi, d)| *xi += d);
        if k_used == 0 {
            residual = norm2(&a.residual(&x, b)) / nb;
            if residual > tol {
                return Err(Error::IterationCap {
                    iterations,
                    residual,
                });
            }
            break;
        }
    }
    Ok(KrylovOutcome {
        x,
        residual,
        iterations,
    })
}
