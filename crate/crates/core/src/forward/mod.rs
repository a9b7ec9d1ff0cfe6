//! The parameter-to-state map `F(c) = u` of
//!
//! ```text
//! -Δu + c u = f  in Ω,   ∂u/∂n = 0  on ∂Ω,
//! ```
//!
//! discretized with P1 elements and lumped mass, together with its Fréchet
//! derivative and the adjoint in the weighted L^2 pairing.

mod linsolve;
mod sparse;

use crate::banach::{lr_norm_slice, pairing_slice, GridFunction};
use crate::error::{Error, Result};
use crate::mesh::{Layout, Mesh};
use linsolve::{pcg, TridiagFactor};
use sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearSolver {
    /// Exact tridiagonal factorization (1D only).
    Direct,
    /// Jacobi-preconditioned conjugate gradient.
    ConjugateGradient { tol: f64, max_iters: usize },
}

impl LinearSolver {
    pub const DEFAULT_CG_TOL: f64 = 1e-10;

    fn default_for(mesh: &Mesh) -> Self {
        match mesh.layout() {
            Layout::Interval { .. } => Self::Direct,
            Layout::Square { .. } => Self::ConjugateGradient {
                tol: Self::DEFAULT_CG_TOL,
                max_iters: 20 * mesh.node_count().max(50),
            },
        }
    }
}

#[derive(Debug, Clone)]
enum Stiffness {
    Tridiagonal { diag: Vec<f64>, off: Vec<f64> },
    Sparse(CsrMatrix),
}

/// Assembled discrete forward problem. Immutable after construction.
#[derive(Debug, Clone)]
pub struct ForwardModel {
    mesh: Mesh,
    source: GridFunction,
    c_floor: f64,
    stiffness: Stiffness,
    solver: LinearSolver,
}

impl ForwardModel {
    pub fn new(mesh: Mesh, source: GridFunction) -> Result<Self> {
        let solver = LinearSolver::default_for(&mesh);
        Self::with_solver(mesh, source, solver)
    }

    pub fn with_solver(mesh: Mesh, source: GridFunction, solver: LinearSolver) -> Result<Self> {
        mesh.check(source.mesh_id())?;
        let stiffness = match (mesh.layout(), solver) {
            (Layout::Interval { nodes }, _) if nodes < 2 => {
                return Err(Error::InvalidParameter(
                    "forward model needs at least one element".into(),
                ));
            }
            (Layout::Interval { nodes }, LinearSolver::Direct) => {
                let (diag, off) = interval_stiffness(nodes, mesh.spacing());
                Stiffness::Tridiagonal { diag, off }
            }
            (Layout::Interval { nodes }, LinearSolver::ConjugateGradient { .. }) => {
                let (diag, off) = interval_stiffness(nodes, mesh.spacing());
                let mut trip = Vec::with_capacity(3 * nodes);
                for i in 0..nodes {
                    trip.push((i, i, diag[i]));
                    if i + 1 < nodes {
                        trip.push((i, i + 1, off[i]));
                        trip.push((i + 1, i, off[i]));
                    }
                }
                Stiffness::Sparse(CsrMatrix::from_triplets(nodes, trip))
            }
            (Layout::Square { .. }, LinearSolver::Direct) => {
                return Err(Error::Unsupported("direct solver is only available in 1D".into()));
            }
            (Layout::Square { .. }, LinearSolver::ConjugateGradient { .. }) => {
                Stiffness::Sparse(assemble_p1_stiffness(&mesh))
            }
        };
        Ok(Self {
            mesh,
            source,
            c_floor: 0.0,
            stiffness,
            solver,
        })
    }

    /// Sets the admissible-set floor `c >= c_floor`. Informational: iterates
    /// are never projected.
    pub fn with_c_floor(mut self, c_floor: f64) -> Self {
        self.c_floor = c_floor;
        self
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn source(&self) -> &GridFunction {
        &self.source
    }

    pub fn c_floor(&self) -> f64 {
        self.c_floor
    }

    pub fn solver(&self) -> LinearSolver {
        self.solver
    }

    pub fn is_admissible(&self, c: &GridFunction) -> bool {
        c.values().iter().all(|&v| v >= self.c_floor)
    }

    /// Symmetric and row sums vanish (constants span the kernel).
    pub fn stiffness_is_neumann_laplacian(&self, tol: f64) -> bool {
        let n = self.mesh.node_count();
        let ones = vec![1.0; n];
        let mut k1 = vec![0.0; n];
        match &self.stiffness {
            Stiffness::Tridiagonal { diag, off } => {
                for i in 0..n {
                    k1[i] = diag[i] + if i > 0 { off[i - 1] } else { 0.0 } + if i + 1 < n { off[i] } else { 0.0 };
                }
                k1.iter().all(|v| v.abs() <= tol)
            }
            Stiffness::Sparse(a) => {
                a.mul_vec(&ones, &mut k1);
                a.is_symmetric(tol) && k1.iter().all(|v| v.abs() <= tol)
            }
        }
    }

    /// Factorizes `K + M diag(c)` and solves for `u(c)`.
    pub fn linearize(&self, c: &GridFunction) -> Result<Linearization<'_>> {
        self.linearize_with_guess(c, None)
    }

    /// As [`linearize`](Self::linearize); `guess` seeds the iterative solver.
    pub fn linearize_with_guess(&self, c: &GridFunction, guess: Option<&GridFunction>) -> Result<Linearization<'_>> {
        self.mesh.check(c.mesh_id())?;
        if !c.is_finite() {
            return Err(Error::NonFinite("forward: potential"));
        }
        if !c.values().iter().any(|&v| v > 0.0) {
            return Err(Error::Solve(
                "potential vanishes identically; pure Neumann system is singular".into(),
            ));
        }
        let w = self.mesh.quad_weights();
        let shift: Vec<f64> = c.values().iter().zip(w).map(|(ci, wi)| ci * wi).collect();
        let system = match (&self.stiffness, self.solver) {
            (Stiffness::Tridiagonal { diag, off }, _) => {
                let d: Vec<f64> = diag.iter().zip(&shift).map(|(a, b)| a + b).collect();
                System::Direct(TridiagFactor::new(&d, off)?)
            }
            (Stiffness::Sparse(k), LinearSolver::ConjugateGradient { tol, max_iters }) => System::Iterative {
                stiffness: k,
                shift,
                tol,
                max_iters,
            },
            (Stiffness::Sparse(_), LinearSolver::Direct) => unreachable!("rejected at construction"),
        };
        let rhs: Vec<f64> = self.source.values().iter().zip(w).map(|(f, wi)| f * wi).collect();
        let u = system.solve(&rhs, guess.map(|g| g.values()))?;
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("forward"));
        }
        Ok(Linearization {
            model: self,
            c: c.clone(),
            u: GridFunction::from_raw(self.mesh.id(), u),
            system,
        })
    }
}

fn interval_stiffness(nodes: usize, h: f64) -> (Vec<f64>, Vec<f64>) {
    let mut diag = vec![2.0 / h; nodes];
    diag[0] = 1.0 / h;
    diag[nodes - 1] = 1.0 / h;
    (diag, vec![-1.0 / h; nodes - 1])
}

fn assemble_p1_stiffness(mesh: &Mesh) -> CsrMatrix {
    let xy = mesh.coords();
    let mut trip = Vec::with_capacity(9 * mesh.triangles().len());
    for t in mesh.triangles() {
        let p = [xy[t[0]], xy[t[1]], xy[t[2]]];
        // edge opposite vertex a
        let e = |a: usize| {
            let (q, r) = (p[(a + 1) % 3], p[(a + 2) % 3]);
            [r[0] - q[0], r[1] - q[1]]
        };
        let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1])).abs();
        for a in 0..3 {
            for b in 0..3 {
                let (ea, eb) = (e(a), e(b));
                trip.push((t[a], t[b], (ea[0] * eb[0] + ea[1] * eb[1]) / (4.0 * area)));
            }
        }
    }
    CsrMatrix::from_triplets(mesh.node_count(), trip)
}

#[derive(Debug)]
enum System<'m> {
    Direct(TridiagFactor),
    Iterative {
        stiffness: &'m CsrMatrix,
        shift: Vec<f64>,
        tol: f64,
        max_iters: usize,
    },
}

impl System<'_> {
    fn solve(&self, rhs: &[f64], guess: Option<&[f64]>) -> Result<Vec<f64>> {
        match self {
            System::Direct(f) => Ok(f.solve(rhs)),
            System::Iterative {
                stiffness,
                shift,
                tol,
                max_iters,
            } => pcg(stiffness, shift, rhs, guess, *tol, *max_iters),
        }
    }
}

/// `F` and its linearization at a fixed potential `c`; the system matrix is
/// factored (1D) or preconditioned (2D) once and reused for every solve.
#[derive(Debug)]
pub struct Linearization<'m> {
    model: &'m ForwardModel,
    c: GridFunction,
    u: GridFunction,
    system: System<'m>,
}

impl Linearization<'_> {
    pub fn potential(&self) -> &GridFunction {
        &self.c
    }

    /// `u(c) = F(c)`.
    pub fn state(&self) -> &GridFunction {
        &self.u
    }

    pub fn into_state(self) -> GridFunction {
        self.u
    }

    /// `F'(c) h = w` with `(K + M diag(c)) w = -M (h ⊙ u)`.
    pub fn derivative(&self, h: &GridFunction) -> Result<GridFunction> {
        let mesh = &self.model.mesh;
        mesh.check(h.mesh_id())?;
        let w = mesh.quad_weights();
        let rhs: Vec<f64> = (0..w.len())
            .map(|i| -w[i] * h.values()[i] * self.u.values()[i])
            .collect();
        let out = self.system.solve(&rhs, None)?;
        Ok(GridFunction::from_raw(mesh.id(), out))
    }

    /// `F'(c)* zeta = -u ⊙ psi` with `(K + M diag(c)) psi = M zeta`.
    pub fn adjoint(&self, zeta: &GridFunction) -> Result<GridFunction> {
        let mesh = &self.model.mesh;
        mesh.check(zeta.mesh_id())?;
        let w = mesh.quad_weights();
        let rhs: Vec<f64> = zeta.values().iter().zip(w).map(|(z, wi)| z * wi).collect();
        let psi = self.system.solve(&rhs, None)?;
        let out = psi.iter().zip(self.u.values()).map(|(p, u)| -u * p).collect();
        Ok(GridFunction::from_raw(mesh.id(), out))
    }

    /// Power iteration on `F'(c)* F'(c)`; returns the estimate of `||F'(c)||`
    /// in the weighted L^2 norms.
    pub fn operator_norm_bound(&self, iterations: usize) -> Result<f64> {
        let mesh = &self.model.mesh;
        let w = mesh.quad_weights();
        let n = w.len();
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * (i as f64 * 0.7).cos()).collect();
        let mut est = 0.0;
        for _ in 0..iterations.max(1) {
            let norm = lr_norm_slice(&v, 2.0, w);
            if norm == 0.0 {
                return Ok(0.0);
            }
            v.iter_mut().for_each(|x| *x /= norm);
            let tv = self.derivative(&GridFunction::from_raw(mesh.id(), v.clone()))?;
            est = lr_norm_slice(tv.values(), 2.0, w);
            v = self.adjoint(&tv)?.into_values();
        }
        Ok(est)
    }
}

/// `F(c)`.
pub fn forward(model: &ForwardModel, c: &GridFunction) -> Result<GridFunction> {
    Ok(model.linearize(c)?.into_state())
}

/// `F'(c) h`, given `u_c = F(c)`.
pub fn derivative_apply(
    model: &ForwardModel,
    c: &GridFunction,
    u_c: &GridFunction,
    h: &GridFunction,
) -> Result<GridFunction> {
    let lin = model.linearize_with_guess(c, Some(u_c))?;
    lin.derivative(h)
}

/// `F'(c)* zeta`, given `u_c = F(c)`.
pub fn adjoint_apply(
    model: &ForwardModel,
    c: &GridFunction,
    u_c: &GridFunction,
    zeta: &GridFunction,
) -> Result<GridFunction> {
    let lin = model.linearize_with_guess(c, Some(u_c))?;
    lin.adjoint(zeta)
}

/// Estimate of `||F'(c)||` by 20 power iterations on `F'(c)* F'(c)`.
pub fn operator_norm_bound(model: &ForwardModel, c: &GridFunction) -> Result<f64> {
    model.linearize(c)?.operator_norm_bound(20)
}

/// `|<zeta, F'(c) h> - <F'(c)* zeta, h>|` relative to `||zeta|| ||F'(c) h|| + ||F'(c)* zeta|| ||h||`.
pub fn adjoint_mismatch(lin: &Linearization<'_>, h: &GridFunction, zeta: &GridFunction) -> Result<f64> {
    let w = lin.model.mesh.quad_weights();
    let th = lin.derivative(h)?;
    let tz = lin.adjoint(zeta)?;
    let lhs = pairing_slice(zeta.values(), th.values(), w);
    let rhs = pairing_slice(tz.values(), h.values(), w);
    let scale = lr_norm_slice(zeta.values(), 2.0, w) * lr_norm_slice(th.values(), 2.0, w)
        + lr_norm_slice(tz.values(), 2.0, w) * lr_norm_slice(h.values(), 2.0, w);
    Ok(if scale == 0.0 {
        (lhs - rhs).abs()
    } else {
        (lhs - rhs).abs() / scale
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model_1d(n: usize) -> ForwardModel {
        let mesh = Mesh::interval(n).unwrap();
        let f = GridFunction::constant(&mesh, 1.0);
        ForwardModel::new(mesh, f).unwrap()
    }

    fn model_2d(n: usize) -> ForwardModel {
        let mesh = Mesh::square(n).unwrap();
        let f = GridFunction::constant(&mesh, 1.0);
        ForwardModel::new(mesh, f).unwrap()
    }

    #[test]
    fn constant_potentials() {
        for model in [model_1d(32), model_2d(8)] {
            let m = model.mesh();
            let u = forward(&model, &GridFunction::constant(m, 2.0)).unwrap();
            assert!(u.values().iter().all(|v| (v - 0.5).abs() < 1e-9));
            let u = forward(&model, &GridFunction::constant(m, 1.0)).unwrap();
            assert!(u.values().iter().all(|v| (v - 1.0).abs() < 1e-9));
        }
    }

    #[test]
    fn zero_potential_is_singular() {
        let model = model_1d(16);
        let zero = GridFunction::zeros(model.mesh());
        assert!(matches!(forward(&model, &zero), Err(Error::Solve(_))));
        let model = model_2d(4);
        let zero = GridFunction::zeros(model.mesh());
        assert!(forward(&model, &zero).is_err());
    }

    #[test]
    fn constant_derivative_and_adjoint() {
        for model in [model_1d(20), model_2d(6)] {
            let m = model.mesh();
            let c = GridFunction::constant(m, 2.0);
            let lin = model.linearize(&c).unwrap();
            let one = GridFunction::constant(m, 1.0);
            let w = lin.derivative(&one).unwrap();
            assert!(w.values().iter().all(|v| (v + 0.25).abs() < 1e-9));
            let g = lin.adjoint(&one).unwrap();
            assert!(g.values().iter().all(|v| (v + 0.25).abs() < 1e-9));
            assert!(lin.derivative(&GridFunction::zeros(m)).unwrap().is_zero());
            assert!(lin.adjoint(&GridFunction::zeros(m)).unwrap().is_zero());
        }
    }

    #[test]
    fn stiffness_structure() {
        assert!(model_1d(10).stiffness_is_neumann_laplacian(1e-12));
        assert!(model_2d(5).stiffness_is_neumann_laplacian(1e-12));
    }

    #[test]
    fn norm_bound_constant_case() {
        let model = model_1d(64);
        let c = GridFunction::constant(model.mesh(), 2.0);
        let b = operator_norm_bound(&model, &c).unwrap();
        assert!((b - 0.25).abs() < 1e-6, "{b}");

        let mesh = model.mesh().clone();
        let doubled = ForwardModel::new(mesh.clone(), GridFunction::constant(&mesh, 2.0)).unwrap();
        let c = GridFunction::constant(&mesh, 2.0);
        let b2 = operator_norm_bound(&doubled, &c).unwrap();
        assert!((b2 - 2.0 * b).abs() < 1e-9 * b2);
    }

    #[test]
    fn adjoint_identity_2d() {
        let model = model_2d(10);
        let m = model.mesh();
        let c = GridFunction::from_fn(m, |p| 1.5 + 0.5 * (p[0] * 3.0).sin() * p[1]);
        let lin = model.linearize(&c).unwrap();
        let h = GridFunction::from_fn(m, |p| (2.0 * p[0] + p[1]).cos());
        let z = GridFunction::from_fn(m, |p| p[0] * p[1] - 0.3);
        assert!(adjoint_mismatch(&lin, &h, &z).unwrap() <= 10.0 * LinearSolver::DEFAULT_CG_TOL);
    }

    #[test]
    fn cg_in_1d_agrees_with_direct() {
        let mesh = Mesh::interval(40).unwrap();
        let f = GridFunction::from_fn(&mesh, |p| 1.0 + p[0]);
        let direct = ForwardModel::new(mesh.clone(), f.clone()).unwrap();
        let cg = ForwardModel::with_solver(
            mesh.clone(),
            f,
            LinearSolver::ConjugateGradient {
                tol: 1e-13,
                max_iters: 1000,
            },
        )
        .unwrap();
        let c = GridFunction::from_fn(&mesh, |p| 2.0 + p[0].sin());
        let a = forward(&direct, &c).unwrap();
        let b = forward(&cg, &c).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}
