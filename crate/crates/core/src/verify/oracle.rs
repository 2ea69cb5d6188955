use crate::error::{Error, Result};
use crate::linalg::LinearSystem;

/// Largest system the dense oracle accepts.
pub const DENSE_LIMIT: usize = 2500;

/// Solve `sys` by Gaussian elimination with partial row pivoting on the
/// dense matrix.
pub fn dense_oracle(sys: &LinearSystem) -> Result<Vec<f64>> {
    let n = sys.len();
    if n > DENSE_LIMIT {
        return Err(Error::Precondition(format!(
            "dense oracle handles at most {DENSE_LIMIT} unknowns, system has {n}"
        )));
    }
    if !sys.matrix.is_square() || sys.rhs.len() != n {
        return Err(Error::Shape("dense oracle needs a square system".into()));
    }
    let mut a = sys.matrix.to_dense();
    let mut b = sys.rhs.clone();
    let scale = sys.matrix.norm_inf().max(f64::MIN_POSITIVE);
    for k in 0..n {
        let (p, pivot) = (k..n)
            .map(|r| (r, a[r][k].abs()))
            .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
        if pivot <= 1e-14 * scale {
            return Err(Error::SingularMatrix {
                detail: format!("dense elimination found no pivot in column {k}"),
                residual: f64::NAN,
            });
        }
        a.swap(k, p);
        b.swap(k, p);
        let (head, tail) = a.split_at_mut(k + 1);
        let row_k = &head[k];
        for (off, row) in tail.iter_mut().enumerate() {
            let m = row[k] / row_k[k];
            if m == 0.0 {
                continue;
            }
            for c in k..n {
                row[c] -= m * row_k[c];
            }
            b[k + 1 + off] -= m * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|c| a[k][c] * x[c]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Ok(x)
}

/// Relative max-norm distance `max|x - y| / max|y|`.
pub fn relative_distance(x: &[f64], y: &[f64]) -> f64 {
    let d = x.iter().zip(y).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let s = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    d / s.max(f64::MIN_POSITIVE)
}
