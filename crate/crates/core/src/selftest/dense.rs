//! Dense reference for the 1D forward problem and the Hilbert-space updates,
//! assembled from scratch with nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mesh::{Layout, Mesh};

/// `u(c)`, `T = F'(c)` and its weighted adjoint as dense matrices.
pub struct DenseLinearization {
    pub u: DVector<f64>,
    pub t: DMatrix<f64>,
    pub t_adj: DMatrix<f64>,
}

impl DenseLinearization {
    /// P1 stiffness with lumped mass on a uniform 1D mesh:
    /// `(K + M diag c) u = M f`, `T = -(K + M diag c)^{-1} M diag u`,
    /// `T* = M^{-1} T^T M`.
    pub fn new(mesh: &Mesh, c: &[f64], f: &[f64]) -> Result<Self> {
        let Layout::Interval { nodes: n } = mesh.layout() else {
            return Err(Error::Unsupported("dense oracle is 1D only".into()));
        };
        let h = 2.0 / (n - 1) as f64;
        let mass: Vec<f64> = (0..n).map(|i| if i == 0 || i == n - 1 { h / 2.0 } else { h }).collect();
        let mut a = DMatrix::<f64>::zeros(n, n);
        for e in 0..n - 1 {
            a[(e, e)] += 1.0 / h;
            a[(e + 1, e + 1)] += 1.0 / h;
            a[(e, e + 1)] -= 1.0 / h;
            a[(e + 1, e)] -= 1.0 / h;
        }
        for i in 0..n {
            a[(i, i)] += mass[i] * c[i];
        }
        let lu = a.lu();
        let rhs = DVector::from_iterator(n, (0..n).map(|i| mass[i] * f[i]));
        let u = lu
            .solve(&rhs)
            .ok_or_else(|| Error::Solve("dense oracle: singular system".into()))?;
        let m_u = DMatrix::from_fn(n, n, |i, j| if i == j { -mass[i] * u[i] } else { 0.0 });
        let t = lu
            .solve(&m_u)
            .ok_or_else(|| Error::Solve("dense oracle: singular system".into()))?;
        let t_adj = DMatrix::from_fn(n, n, |i, j| t[(j, i)] * mass[j] / mass[i]);
        Ok(Self { u, t, t_adj })
    }
}

/// `x - T* (2I - T T*)(F(x) - y)`.
pub fn dense_hpicp_update(lin: &DenseLinearization, x: &[f64], y: &[f64]) -> Vec<f64> {
    let r = &lin.u - DVector::from_column_slice(y);
    let inner = &r * 2.0 - &lin.t * (&lin.t_adj * &r);
    (DVector::from_column_slice(x) - &lin.t_adj * inner)
        .iter()
        .copied()
        .collect()
}

/// `x - T* (F(x) - y)`.
pub fn dense_licp_update(lin: &DenseLinearization, x: &[f64], y: &[f64]) -> Vec<f64> {
    let r = &lin.u - DVector::from_column_slice(y);
    (DVector::from_column_slice(x) - &lin.t_adj * r)
        .iter()
        .copied()
        .collect()
}
