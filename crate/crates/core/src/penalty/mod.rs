//! Convex penalties `Theta(x) = 1/(2 beta) ||x||^2 + R(x)` with `R` either
//! zero, the L^1 norm, or total variation, and the map `xi -> grad Theta*(xi)`
//! realized as `argmin_x { Theta(x) - <xi, x> }`.

mod rof;
mod tv1d;

pub use rof::{fista_rof, fista_rof_warm, RofWorkspace};
pub use tv1d::tv1d_prox;

use serde::{Deserialize, Serialize};

use crate::banach::{compensated_sum, GridFunction};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use rof::Differences;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PenaltyKind {
    /// Quadratic part only; used for Hilbert-space reductions.
    L2,
    L2L1,
    L2TV,
}

impl std::str::FromStr for PenaltyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" => Ok(Self::L2),
            "l2l1" | "l2+l1" => Ok(Self::L2L1),
            "l2tv" | "l2+tv" => Ok(Self::L2TV),
            _ => Err(Error::Config(format!(
                "unknown penalty `{s}` (expected l2, l2l1 or l2tv)"
            ))),
        }
    }
}

impl std::fmt::Display for PenaltyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::L2 => "l2",
            Self::L2L1 => "l2l1",
            Self::L2TV => "l2tv",
        })
    }
}

/// Inner solver for the ROF subproblem of the TV penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TvSolver {
    /// Exact dynamic programming on 1D meshes, FISTA on 2D meshes.
    #[default]
    Auto,
    /// Dual FISTA on every mesh, controlled by the inner tolerances.
    Fista,
    /// Exact dynamic programming; 1D meshes only.
    Exact,
}

impl std::str::FromStr for TvSolver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "fista" => Ok(Self::Fista),
            "exact" => Ok(Self::Exact),
            _ => Err(Error::Config(format!(
                "unknown tv_solver `{s}` (expected auto, fista or exact)"
            ))),
        }
    }
}

impl std::fmt::Display for TvSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Auto => "auto",
            Self::Fista => "fista",
            Self::Exact => "exact",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    pub kind: PenaltyKind,
    pub beta: f64,
    /// FISTA iteration cap; unused by the exact 1D solver.
    pub tv_inner_max_iters: usize,
    /// FISTA stopping tolerance on the relative change of the primal iterate.
    pub tv_inner_tol: f64,
    pub tv_solver: TvSolver,
}

impl PenaltySpec {
    pub const DEFAULT_TV_MAX_ITERS: usize = 500;
    pub const DEFAULT_TV_TOL: f64 = 1e-6;

    pub fn new(kind: PenaltyKind, beta: f64) -> Result<Self> {
        Self::with_inner(kind, beta, Self::DEFAULT_TV_MAX_ITERS, Self::DEFAULT_TV_TOL)
    }

    pub fn with_inner(kind: PenaltyKind, beta: f64, max_iters: usize, tol: f64) -> Result<Self> {
        let spec = Self {
            kind,
            beta,
            tv_inner_max_iters: max_iters,
            tv_inner_tol: tol,
            tv_solver: TvSolver::Auto,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta must be > 0, got {}", self.beta)));
        }
        if self.tv_inner_max_iters == 0 || !(self.tv_inner_tol > 0.0) {
            return Err(Error::InvalidParameter("TV inner controls must be positive".into()));
        }
        Ok(())
    }

    /// 2-convexity constant: `D_xi Theta(z, x) >= c0 ||z - x||^2`.
    pub fn convexity_constant(&self) -> f64 {
        1.0 / (2.0 * self.beta)
    }
}

/// Discrete TV: `sum |x_{i+1} - x_i|` in 1D, isotropic
/// `sum h sqrt(dx^2 + dy^2)` with forward differences in 2D.
pub fn tv_seminorm(x: &GridFunction, mesh: &Mesh) -> Result<f64> {
    mesh.check(x.mesh_id())?;
    if x.len() < 2 {
        return Ok(0.0);
    }
    Ok(Differences::for_mesh(mesh).total_variation(x.values()))
}

pub fn theta_value(spec: &PenaltySpec, x: &GridFunction, mesh: &Mesh) -> Result<f64> {
    mesh.check(x.mesh_id())?;
    let w = mesh.quad_weights();
    let v = x.values();
    let quad = compensated_sum(v.iter().zip(w).map(|(&a, &wi)| wi * a * a)) / (2.0 * spec.beta);
    let extra = match spec.kind {
        PenaltyKind::L2 => 0.0,
        PenaltyKind::L2L1 => compensated_sum(v.iter().zip(w).map(|(&a, &wi)| wi * a.abs())),
        PenaltyKind::L2TV => tv_seminorm(x, mesh)?,
    };
    Ok(quad + extra)
}

/// Returns `xi_0 = 0`, a subgradient of every supported penalty at `x0 = 0`.
pub fn initial_subgradient(_spec: &PenaltySpec, x0: &GridFunction) -> Result<GridFunction> {
    if !x0.is_zero() {
        return Err(Error::Unsupported("only the initial guess x0 = 0 is supported".into()));
    }
    Ok(GridFunction::from_raw(x0.mesh_id(), vec![0.0; x0.len()]))
}

/// `beta * soft(xi, 1)`, the minimizer for the L^2 + L^1 penalty.
pub fn soft_threshold(xi: f64, beta: f64) -> f64 {
    if xi > 1.0 {
        beta * (xi - 1.0)
    } else if xi < -1.0 {
        beta * (xi + 1.0)
    } else {
        0.0
    }
}

/// `grad Theta*(xi) = argmin_x { Theta(x) - <xi, x> }` with a fresh inner
/// solver state.
pub fn conjugate_grad(spec: &PenaltySpec, xi: &GridFunction, mesh: &Mesh) -> Result<GridFunction> {
    ConjugateMap::new(*spec).apply(xi, mesh)
}

/// Stateful `grad Theta*` that warm-starts the TV inner solver across calls.
#[derive(Debug, Clone)]
pub struct ConjugateMap {
    spec: PenaltySpec,
    workspace: RofWorkspace,
}

impl ConjugateMap {
    pub fn new(spec: PenaltySpec) -> Self {
        Self {
            spec,
            workspace: RofWorkspace::new(),
        }
    }

    pub fn spec(&self) -> &PenaltySpec {
        &self.spec
    }

    pub fn workspace(&self) -> &RofWorkspace {
        &self.workspace
    }

    pub fn apply(&mut self, xi: &GridFunction, mesh: &Mesh) -> Result<GridFunction> {
        mesh.check(xi.mesh_id())?;
        let beta = self.spec.beta;
        match self.spec.kind {
            PenaltyKind::L2 => Ok(xi.scaled(beta)),
            PenaltyKind::L2L1 => Ok(xi.map(|v| soft_threshold(v, beta))),
            PenaltyKind::L2TV => {
                // argmin beta TV(x) + 1/2 ||x - beta xi||^2
                let data = xi.scaled(beta);
                let exact = match self.spec.tv_solver {
                    TvSolver::Auto => mesh.dimension() == 1,
                    TvSolver::Fista => false,
                    TvSolver::Exact if mesh.dimension() == 1 => true,
                    TvSolver::Exact => {
                        return Err(Error::Unsupported("the exact TV solver handles 1D meshes only".into()))
                    }
                };
                if exact {
                    let x = tv1d_prox(data.values(), mesh.quad_weights(), beta);
                    return GridFunction::new(mesh, x);
                }
                fista_rof_warm(
                    &data,
                    beta,
                    mesh,
                    self.spec.tv_inner_max_iters,
                    self.spec.tv_inner_tol,
                    &mut self.workspace,
                )
            }
        }
    }
}
