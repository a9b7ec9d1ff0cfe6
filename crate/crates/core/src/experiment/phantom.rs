use crate::banach::GridFunction;
use crate::error::{Error, Result};
use crate::mesh::Mesh;

fn indicator(a: f64, b: f64, x: f64) -> f64 {
    if (a..=b).contains(&x) {
        1.0
    } else {
        0.0
    }
}

/// `2 + 3/4 χ[-0.5,-0.3] + 3/2 χ[-0.1,0.1] + 1/2 χ[0.3,0.5]`, closed intervals.
pub fn phantom_1d_value(x: f64) -> f64 {
    2.0 + 0.75 * indicator(-0.5, -0.3, x) + 1.5 * indicator(-0.1, 0.1, x) + 0.5 * indicator(0.3, 0.5, x)
}

/// `1 + cos(πx) cos(πy) χ{|(x,y)|_∞ < 1/2}`.
pub fn phantom_2d_value(x: f64, y: f64) -> f64 {
    use std::f64::consts::PI;
    if x.abs().max(y.abs()) < 0.5 {
        1.0 + (PI * x).cos() * (PI * y).cos()
    } else {
        1.0
    }
}

pub fn phantom_1d(mesh: &Mesh) -> Result<GridFunction> {
    if mesh.dimension() != 1 {
        return Err(Error::InvalidParameter("phantom_1d needs a 1D mesh".into()));
    }
    Ok(GridFunction::from_fn(mesh, |p| phantom_1d_value(p[0])))
}

pub fn phantom_2d(mesh: &Mesh) -> Result<GridFunction> {
    if mesh.dimension() != 2 {
        return Err(Error::InvalidParameter("phantom_2d needs a 2D mesh".into()));
    }
    Ok(GridFunction::from_fn(mesh, |p| phantom_2d_value(p[0], p[1])))
}
