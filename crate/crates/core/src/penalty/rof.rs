//! Dual FISTA for the weighted ROF problem
//!
//! ```text
//! min_x  weight * TV(x) + 1/2 ||x - data||^2_{L^2}
//! ```
//!
//! The dual variable `p` lives on the forward differences of the nodal grid
//! and is constrained to balls of radius `weight` (1D) or `weight * h` (2D,
//! isotropic). The primal point is recovered as `x = data - W^{-1} D^T p`.

use crate::banach::{compensated_sum, GridFunction};
use crate::error::{Error, Result};
use crate::mesh::{Layout, Mesh};

/// Forward-difference operator on the nodal grid, zero-padded at the
/// last node of each direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Differences {
    Line { n: usize },
    Grid { nx: usize, ny: usize, h: f64 },
}

impl Differences {
    pub(crate) fn for_mesh(mesh: &Mesh) -> Self {
        match mesh.layout() {
            Layout::Interval { nodes } => Self::Line { n: nodes },
            Layout::Square { nx, ny } => Self::Grid {
                nx,
                ny,
                h: mesh.spacing(),
            },
        }
    }

    /// Length of the dual variable.
    fn dual_len(&self) -> usize {
        match *self {
            Self::Line { n } => n.saturating_sub(1),
            Self::Grid { nx, ny, .. } => 2 * nx * ny,
        }
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        match *self {
            Self::Line { n } => {
                for e in 0..n - 1 {
                    out[e] = x[e + 1] - x[e];
                }
            }
            Self::Grid { nx, ny, .. } => {
                let (gx, gy) = out.split_at_mut(nx * ny);
                for j in 0..ny {
                    for i in 0..nx {
                        let k = j * nx + i;
                        gx[k] = if i + 1 < nx { x[k + 1] - x[k] } else { 0.0 };
                        gy[k] = if j + 1 < ny { x[k + nx] - x[k] } else { 0.0 };
                    }
                }
            }
        }
    }

    fn adjoint(&self, p: &[f64], out: &mut [f64]) {
        match *self {
            Self::Line { n } => {
                for i in 0..n {
                    let left = if i >= 1 { p[i - 1] } else { 0.0 };
                    let right = if i + 1 < n { p[i] } else { 0.0 };
                    out[i] = left - right;
                }
            }
            Self::Grid { nx, ny, .. } => {
                let (px, py) = p.split_at(nx * ny);
                for j in 0..ny {
                    for i in 0..nx {
                        let k = j * nx + i;
                        let mut v = 0.0;
                        if i + 1 < nx {
                            v -= px[k];
                        }
                        if i >= 1 {
                            v += px[k - 1];
                        }
                        if j + 1 < ny {
                            v -= py[k];
                        }
                        if j >= 1 {
                            v += py[k - nx];
                        }
                        out[k] = v;
                    }
                }
            }
        }
    }

    /// Projects `p` onto the dual constraint set for the given weight.
    fn project(&self, p: &mut [f64], weight: f64) {
        match *self {
            Self::Line { .. } => {
                for v in p.iter_mut() {
                    *v = v.clamp(-weight, weight);
                }
            }
            Self::Grid { nx, ny, h } => {
                let radius = weight * h;
                let (px, py) = p.split_at_mut(nx * ny);
                for j in 0..ny {
                    for i in 0..nx {
                        let k = j * nx + i;
                        if i + 1 == nx {
                            px[k] = 0.0;
                        }
                        if j + 1 == ny {
                            py[k] = 0.0;
                        }
                        let norm = (px[k] * px[k] + py[k] * py[k]).sqrt();
                        if norm > radius {
                            let s = radius / norm;
                            px[k] *= s;
                            py[k] *= s;
                        }
                    }
                }
            }
        }
    }

    /// Discrete TV of nodal values.
    pub(crate) fn total_variation(&self, x: &[f64]) -> f64 {
        match *self {
            Self::Line { n } => compensated_sum((0..n - 1).map(|e| (x[e + 1] - x[e]).abs())),
            Self::Grid { nx, ny, h } => compensated_sum((0..nx * ny).map(|k| {
                let (i, j) = (k % nx, k / nx);
                let dx = if i + 1 < nx { x[k + 1] - x[k] } else { 0.0 };
                let dy = if j + 1 < ny { x[k + nx] - x[k] } else { 0.0 };
                h * (dx * dx + dy * dy).sqrt()
            })),
        }
    }

    /// Gershgorin bound on `||D W^{-1} D^T||`.
    fn lipschitz(&self, w: &[f64]) -> f64 {
        match *self {
            Self::Line { n } => {
                let deg = |i: usize| if i == 0 || i + 1 == n { 1.0 } else { 2.0 };
                (0..n - 1)
                    .map(|e| deg(e) / w[e] + deg(e + 1) / w[e + 1])
                    .fold(0.0, f64::max)
            }
            Self::Grid { nx, ny, .. } => {
                let deg = |k: usize| {
                    let (i, j) = (k % nx, k / nx);
                    let mut d = 0.0;
                    if i + 1 < nx {
                        d += 1.0;
                    }
                    if i >= 1 {
                        d += 1.0;
                    }
                    if j + 1 < ny {
                        d += 1.0;
                    }
                    if j >= 1 {
                        d += 1.0;
                    }
                    d
                };
                let mut l: f64 = 0.0;
                for k in 0..nx * ny {
                    let (i, j) = (k % nx, k / nx);
                    if i + 1 < nx {
                        l = l.max(deg(k) / w[k] + deg(k + 1) / w[k + 1]);
                    }
                    if j + 1 < ny {
                        l = l.max(deg(k) / w[k] + deg(k + nx) / w[k + nx]);
                    }
                }
                l
            }
        }
    }
}

/// Warm-start state for repeated ROF solves on one mesh. One per solver
/// instance; not shared between threads.
#[derive(Debug, Clone, Default)]
pub struct RofWorkspace {
    dual: Vec<f64>,
    iterations: usize,
    gap: f64,
}

impl RofWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inner iterations spent by the last solve.
    pub fn last_iterations(&self) -> usize {
        self.iterations
    }

    /// Duality gap at the end of the last solve.
    pub fn last_gap(&self) -> f64 {
        self.gap
    }

    pub fn reset(&mut self) {
        self.dual.clear();
    }
}

/// Approximate minimizer of `weight * TV(x) + 1/2 ||x - data||^2`, starting
/// from zero dual variable. Stops once the primal iterate moves by at most
/// `tol` relative to its weighted norm; fails with
/// [`Error::RofConvergence`] after `max_iters` steps.
pub fn fista_rof(data: &GridFunction, weight: f64, mesh: &Mesh, max_iters: usize, tol: f64) -> Result<GridFunction> {
    fista_rof_warm(data, weight, mesh, max_iters, tol, &mut RofWorkspace::new())
}

/// As [`fista_rof`], warm-started from (and updating) `ws`.
pub fn fista_rof_warm(
    data: &GridFunction,
    weight: f64,
    mesh: &Mesh,
    max_iters: usize,
    tol: f64,
    ws: &mut RofWorkspace,
) -> Result<GridFunction> {
    mesh.check(data.mesh_id())?;
    if !(weight > 0.0) {
        return Err(Error::InvalidParameter(format!("ROF weight must be > 0, got {weight}")));
    }
    let ops = Differences::for_mesh(mesh);
    let w = mesh.quad_weights();
    let b = data.values();
    let n = b.len();
    let m = ops.dual_len();
    if n < 2 {
        return Ok(data.clone());
    }

    if ws.dual.len() != m {
        ws.dual = vec![0.0; m];
    }
    ops.project(&mut ws.dual, weight);

    let step = 1.0 / ops.lipschitz(w);
    let b_sq = compensated_sum(b.iter().zip(w).map(|(&v, &wi)| wi * v * v));

    let mut p = std::mem::take(&mut ws.dual);
    let mut p_prev = p.clone();
    let mut y = p.clone();
    let mut dtp = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut grad = vec![0.0; m];

    // x(p) = b - W^{-1} D^T p; dual value d(p) = 1/2 ||b||^2 - 1/2 ||x(p)||^2
    let primal_of = |p: &[f64], dtp: &mut [f64], x: &mut [f64]| {
        ops.adjoint(p, dtp);
        for i in 0..n {
            x[i] = b[i] - dtp[i] / w[i];
        }
    };
    let dual_value = |x: &[f64]| 0.5 * (b_sq - compensated_sum(x.iter().zip(w).map(|(&v, &wi)| wi * v * v)));
    // Certified stop: 1/2 ||x - x*||^2 <= gap, so gap <= tol * 1/2 ||x||^2
    // bounds the relative primal error by sqrt(tol).
    let gap_of = |x: &[f64], d: f64| {
        let primal = weight * ops.total_variation(x)
            + 0.5 * compensated_sum(x.iter().zip(b).zip(w).map(|((&a, &c), &wi)| wi * (a - c) * (a - c)));
        let x_sq = compensated_sum(x.iter().zip(w).map(|(&v, &wi)| wi * v * v));
        ((primal - d).max(0.0), 0.5 * x_sq)
    };
    let done = |gap: f64, half_x_sq: f64| gap <= tol * half_x_sq || gap <= f64::EPSILON * 0.5 * b_sq;

    primal_of(&p, &mut dtp, &mut x);
    let mut d_prev = dual_value(&x);
    let (mut gap, half_x_sq) = gap_of(&x, d_prev);
    let mut converged = done(gap, half_x_sq);
    let mut t = 1.0_f64;
    let mut iters = 0;

    while !converged && iters < max_iters {
        iters += 1;
        primal_of(&y, &mut dtp, &mut x);
        ops.apply(&x, &mut grad);
        std::mem::swap(&mut p, &mut p_prev);
        for e in 0..m {
            p[e] = y[e] + step * grad[e];
        }
        ops.project(&mut p, weight);

        primal_of(&p, &mut dtp, &mut x);
        let d = dual_value(&x);
        let (g, half_x_sq) = gap_of(&x, d);
        gap = g;
        if done(gap, half_x_sq) {
            converged = true;
            break;
        }

        if d < d_prev {
            // adaptive restart: drop momentum when the dual objective decreases
            t = 1.0;
            y.copy_from_slice(&p);
        } else {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let beta = (t - 1.0) / t_next;
            for e in 0..m {
                y[e] = p[e] + beta * (p[e] - p_prev[e]);
            }
            t = t_next;
        }
        d_prev = d;
    }

    ws.gap = gap;
    ws.iterations = iters;
    ws.dual = p;

    if !converged {
        return Err(Error::RofConvergence {
            iterations: iters,
            gap: ws.gap,
            last: x,
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("fista_rof"));
    }
    Ok(GridFunction::from_raw(data.mesh_id(), x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjoint_matches_transpose() {
        for mesh in [Mesh::interval(6).unwrap(), Mesh::square(4).unwrap()] {
            let ops = Differences::for_mesh(&mesh);
            let n = mesh.node_count();
            let m = ops.dual_len();
            let x: Vec<f64> = (0..n).map(|i| ((i * 7 % 5) as f64 - 2.0) * 0.3).collect();
            let mut p: Vec<f64> = (0..m).map(|e| ((e * 3 % 7) as f64 - 3.0) * 0.2).collect();
            // the padded components carry no information
            ops.project(&mut p, 1e9);
            let mut dx = vec![0.0; m];
            let mut dtp = vec![0.0; n];
            ops.apply(&x, &mut dx);
            ops.adjoint(&p, &mut dtp);
            let lhs: f64 = dx.iter().zip(&p).map(|(a, b)| a * b).sum();
            let rhs: f64 = x.iter().zip(&dtp).map(|(a, b)| a * b).sum();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_data_is_fixed() {
        let mesh = Mesh::interval(12).unwrap();
        let data = GridFunction::constant(&mesh, 1.7);
        let x = fista_rof(&data, 0.5, &mesh, 100, 1e-10).unwrap();
        for v in x.values() {
            assert!((v - 1.7).abs() < 1e-12);
        }
    }

    #[test]
    fn tiny_weight_is_identity() {
        let mesh = Mesh::interval(9).unwrap();
        let data = GridFunction::from_fn(&mesh, |p| (4.0 * p[0]).sin());
        let x = fista_rof(&data, 1e-12, &mesh, 100, 1e-8).unwrap();
        for (a, b) in x.values().iter().zip(data.values()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn reports_non_convergence() {
        let mesh = Mesh::interval(64).unwrap();
        let data = GridFunction::from_fn(
            &mesh,
            |p| if p[0] > 0.1 { 1.0 } else { -0.4 } + 0.1 * (17.0 * p[0]).sin(),
        );
        match fista_rof(&data, 0.2, &mesh, 2, 1e-15) {
            Err(Error::RofConvergence { iterations, last, .. }) => {
                assert_eq!(iterations, 2);
                assert_eq!(last.len(), mesh.node_count());
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn two_dimensional_constant_and_gap() {
        let mesh = Mesh::square(6).unwrap();
        let data = GridFunction::constant(&mesh, -0.3);
        let x = fista_rof(&data, 2.0, &mesh, 50, 1e-12).unwrap();
        assert!(x.values().iter().all(|v| (v + 0.3).abs() < 1e-12));

        let data = GridFunction::from_fn(&mesh, |p| if p[0].abs() < 0.5 && p[1].abs() < 0.5 { 1.0 } else { 0.0 });
        let mut ws = RofWorkspace::new();
        fista_rof_warm(&data, 0.1, &mesh, 20_000, 1e-14, &mut ws).unwrap();
        assert!(ws.last_gap() < 1e-6, "gap {}", ws.last_gap());
    }
}
