//! Linear solvers for `(K + diag(m c)) u = b`: a direct tridiagonal
//! factorization in 1D and Jacobi-preconditioned CG in 2D.

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// LDL^T-style Thomas factorization of a symmetric tridiagonal matrix.
#[derive(Debug, Clone)]
pub(crate) struct TridiagFactor {
    /// Multipliers of the unit lower factor.
    lower: Vec<f64>,
    pivots: Vec<f64>,
}

impl TridiagFactor {
    /// `diag[i]` is A_ii, `off[i]` is A_{i,i+1} = A_{i+1,i}.
    pub(crate) fn new(diag: &[f64], off: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut pivots = vec![0.0; n];
        let mut lower = vec![0.0; n.saturating_sub(1)];
        let scale = diag.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
        pivots[0] = diag[0];
        for i in 1..n {
            if !(pivots[i - 1].abs() > 1e-13 * scale) {
                return Err(Error::Solve(format!(
                    "singular system (pivot {} at row {})",
                    pivots[i - 1],
                    i - 1
                )));
            }
            lower[i - 1] = off[i - 1] / pivots[i - 1];
            pivots[i] = diag[i] - lower[i - 1] * off[i - 1];
        }
        if !(pivots[n - 1].abs() > 1e-13 * scale) {
            return Err(Error::Solve(format!(
                "singular system (pivot {} at row {})",
                pivots[n - 1],
                n - 1
            )));
        }
        Ok(Self { lower, pivots })
    }

    pub(crate) fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut y = rhs.to_vec();
        for i in 1..n {
            y[i] -= self.lower[i - 1] * y[i - 1];
        }
        // back substitution with U = D L^T
        y[n - 1] /= self.pivots[n - 1];
        for i in (0..n - 1).rev() {
            y[i] = y[i] / self.pivots[i] - self.lower[i] * y[i + 1];
        }
        y
    }
}

/// Jacobi-preconditioned CG on `K + diag(shift)`.
pub(crate) fn pcg(
    stiffness: &CsrMatrix,
    shift: &[f64],
    rhs: &[f64],
    guess: Option<&[f64]>,
    tol: f64,
    max_iters: usize,
) -> Result<Vec<f64>> {
    let n = stiffness.dim();
    let inv_diag: Vec<f64> = stiffness
        .diagonal()
        .iter()
        .zip(shift)
        .map(|(k, s)| {
            let d = k + s;
            if d > 0.0 {
                1.0 / d
            } else {
                1.0
            }
        })
        .collect();
    let apply = |x: &[f64], out: &mut [f64]| {
        stiffness.mul_vec(x, out);
        for i in 0..n {
            out[i] += shift[i] * x[i];
        }
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    let b_norm = dot(rhs, rhs).sqrt();
    if b_norm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut x = guess.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut r = vec![0.0; n];
    apply(&x, &mut r);
    for i in 0..n {
        r[i] = rhs[i] - r[i];
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut res = dot(&r, &r).sqrt() / b_norm;
    for it in 0..max_iters {
        if res <= tol {
            return Ok(x);
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Solve(format!(
                "operator not positive definite (p^T A p = {pap:e}, iteration {it})"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        res = dot(&r, &r).sqrt() / b_norm;
    }
    if res <= tol {
        Ok(x)
    } else {
        Err(Error::LinearConvergence {
            iterations: max_iters,
            residual: res,
        })
    }
}
