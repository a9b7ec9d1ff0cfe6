//! Discrete L^r spaces on a fixed mesh: norms, the duality pairing, the
//! duality mapping J_r and Bregman distances.
//!
//! Integrals use the lumped nodal quadrature of [`Mesh::quad_weights`].
//! J_r is applied pointwise and never sees the weights, so that
//! `<J_r(v), v> = ||v||_r^r` and `||J_r(v)||_{r*} = ||v||_r^{r-1}` hold in the
//! discrete setting as well.

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::penalty::{theta_value, PenaltySpec};

/// Exponents of the data space `L^r` together with its conjugate.
/// The penalty convexity `p` and the space exponent `s` are both fixed to 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents {
    r: f64,
    r_star: f64,
}

impl Exponents {
    pub const P: f64 = 2.0;
    pub const S: f64 = 2.0;

    pub fn new(r: f64) -> Result<Self> {
        if !(r > 1.0) || !r.is_finite() {
            return Err(Error::InvalidParameter(format!("data exponent r must be > 1, got {r}")));
        }
        Ok(Self {
            r,
            r_star: r / (r - 1.0),
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn r_star(&self) -> f64 {
        self.r_star
    }
}

/// Nodal values of a field on a particular mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    mesh_id: u64,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(mesh: &Mesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.node_count() {
            return Err(Error::LengthMismatch {
                expected: mesh.node_count(),
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("GridFunction::new"));
        }
        Ok(Self {
            mesh_id: mesh.id(),
            values,
        })
    }

    pub fn zeros(mesh: &Mesh) -> Self {
        Self {
            mesh_id: mesh.id(),
            values: vec![0.0; mesh.node_count()],
        }
    }

    pub fn constant(mesh: &Mesh, value: f64) -> Self {
        Self {
            mesh_id: mesh.id(),
            values: vec![value; mesh.node_count()],
        }
    }

    /// Evaluates `f` at every node.
    pub fn from_fn(mesh: &Mesh, f: impl Fn([f64; 2]) -> f64) -> Self {
        Self {
            mesh_id: mesh.id(),
            values: mesh.coords().iter().map(|&p| f(p)).collect(),
        }
    }

    /// Unchecked constructor for values produced inside the crate.
    pub(crate) fn from_raw(mesh_id: u64, values: Vec<f64>) -> Self {
        Self { mesh_id, values }
    }

    pub fn mesh_id(&self) -> u64 {
        self.mesh_id
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.mesh_id, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: f64, other: &GridFunction, b: f64) -> Result<Self> {
        self.same_mesh(other)?;
        Ok(Self::from_raw(
            self.mesh_id,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&x, &y)| a * x + b * y)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.lin_comb(1.0, other, -1.0)
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.lin_comb(1.0, other, 1.0)
    }

    fn same_mesh(&self, other: &GridFunction) -> Result<()> {
        if self.mesh_id == other.mesh_id {
            Ok(())
        } else {
            Err(Error::MeshMismatch {
                expected: self.mesh_id,
                found: other.mesh_id,
            })
        }
    }
}

/// Neumaier-compensated sum.
pub fn compensated_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

/// `(sum_i w_i |v_i|^r)^(1/r)`.
pub fn lr_norm(v: &GridFunction, r: f64, mesh: &Mesh) -> Result<f64> {
    mesh.check(v.mesh_id())?;
    if !(r > 1.0) {
        return Err(Error::InvalidParameter(format!("norm exponent must be > 1, got {r}")));
    }
    Ok(lr_norm_slice(v.values(), r, mesh.quad_weights()))
}

pub(crate) fn lr_norm_slice(v: &[f64], r: f64, w: &[f64]) -> f64 {
    // scale by max |v_i| so large exponents neither overflow nor underflow
    let vmax = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if vmax == 0.0 {
        return 0.0;
    }
    if r == 2.0 {
        let s = compensated_sum(v.iter().zip(w).map(|(&x, &wi)| wi * (x / vmax) * (x / vmax)));
        return vmax * s.sqrt();
    }
    let s = compensated_sum(v.iter().zip(w).map(|(&x, &wi)| wi * (x.abs() / vmax).powf(r)));
    vmax * s.powf(1.0 / r)
}

/// Pointwise `|v|^(r-1) sign(v)`.
pub fn duality_map(v: &GridFunction, r: f64) -> Result<GridFunction> {
    if !(r > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "duality exponent must be > 1, got {r}"
        )));
    }
    Ok(GridFunction::from_raw(v.mesh_id(), duality_map_slice(v.values(), r)))
}

pub(crate) fn duality_map_slice(v: &[f64], r: f64) -> Vec<f64> {
    if r == 2.0 {
        return v.to_vec();
    }
    v.iter()
        .map(|&x| {
            if x == 0.0 {
                0.0
            } else {
                x.abs().powf(r - 1.0) * x.signum()
            }
        })
        .collect()
}

/// Weighted duality pairing `sum_i w_i xi_i x_i`.
pub fn pairing(xi: &GridFunction, x: &GridFunction, mesh: &Mesh) -> Result<f64> {
    mesh.check(xi.mesh_id())?;
    mesh.check(x.mesh_id())?;
    Ok(pairing_slice(xi.values(), x.values(), mesh.quad_weights()))
}

pub(crate) fn pairing_slice(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    compensated_sum(a.iter().zip(b).zip(w).map(|((&x, &y), &wi)| wi * x * y))
}

/// `D_xi Theta(z, x) = Theta(z) - Theta(x) - <xi, z - x>`.
///
/// `xi` must be a subgradient of Theta at `x`; the distance is then
/// non-negative.
pub fn bregman_distance(
    theta: &PenaltySpec,
    z: &GridFunction,
    x: &GridFunction,
    xi: &GridFunction,
    mesh: &Mesh,
) -> Result<f64> {
    let diff = z.sub(x)?;
    let tz = theta_value(theta, z, mesh)?;
    let tx = theta_value(theta, x, mesh)?;
    let lin = pairing(xi, &diff, mesh)?;
    Ok(compensated_sum([tz, -tx, -lin]))
}

/// `||c - c_true||_{L^2} / ||c_true||_{L^2}`.
pub fn relative_error(c: &GridFunction, c_true: &GridFunction, mesh: &Mesh) -> Result<f64> {
    let denom = lr_norm(c_true, 2.0, mesh)?;
    if denom == 0.0 {
        return Err(Error::InvalidParameter(
            "relative error against a zero reference".into(),
        ));
    }
    Ok(lr_norm(&c.sub(c_true)?, 2.0, mesh)? / denom)
}
