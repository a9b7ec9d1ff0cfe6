//! Independent oracles and the numerical self-test suite.
//!
//! Every suite checks production code against something computed a different
//! way: dense linear algebra, closed forms, finite differences, manufactured
//! solutions, or the quadratic-time taut-string construction.

mod dense;
mod taut_string;

use std::time::Instant;

pub use dense::{dense_hpicp_update, dense_licp_update, DenseLinearization};
pub use taut_string::taut_string;

use crate::banach::{bregman_distance, lr_norm, GridFunction};
use crate::error::Result;
use crate::experiment::{phantom_1d, NoiseRng};
use crate::forward::{adjoint_mismatch, forward, ForwardModel};
use crate::iterate::{hpicp_step, licp_step, run_with_observer, IterationState, Method, SolverConfig, StepRule};
use crate::mesh::Mesh;
use crate::penalty::{conjugate_grad, fista_rof, ConjugateMap, PenaltyKind, PenaltySpec, TvSolver};

pub const ADJOINT_TOL: f64 = 1e-10;
pub const FD_RATIO_RANGE: (f64, f64) = (8.0, 12.0);
pub const MMS_MIN_RATIO: f64 = 3.5;
pub const TV_ORACLE_TOL: f64 = 1e-5;
pub const HILBERT_TOL: f64 = 1e-12;
pub const MONOTONE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default)]
pub struct SelftestOptions {
    /// Negative control: negate the adjoint inside the adjoint suite.
    pub flip_adjoint_sign: bool,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {:<14} {} ({:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.seconds
        )
    }
}

fn timed(name: &'static str, body: impl FnOnce() -> Result<(bool, String)>) -> SuiteReport {
    let start = Instant::now();
    let (passed, detail) = body().unwrap_or_else(|e| (false, format!("error: {e}")));
    SuiteReport {
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_all(opts: &SelftestOptions) -> Vec<SuiteReport> {
    vec![
        adjoint_suite(opts),
        gradient_suite(opts),
        manufactured_suite(),
        l1_prox_suite(opts),
        tv_prox_suite(opts),
        hilbert_suite(opts),
        monotonicity_suite(),
    ]
}

fn unit_model(mesh: Mesh) -> Result<ForwardModel> {
    let f = GridFunction::constant(&mesh, 1.0);
    ForwardModel::new(mesh, f)
}

fn random_fn(mesh: &Mesh, rng: &mut NoiseRng, lo: f64, hi: f64) -> Result<GridFunction> {
    let v = (0..mesh.node_count()).map(|_| lo + (hi - lo) * rng.uniform()).collect();
    GridFunction::new(mesh, v)
}

/// `<F'(c) h, zeta> = <h, F'(c)* zeta>` on 200 random triples, 1D, N = 64.
pub fn adjoint_suite(opts: &SelftestOptions) -> SuiteReport {
    timed("adjoint", || {
        let model = unit_model(Mesh::interval(64)?)?;
        let mesh = model.mesh().clone();
        let mut rng = NoiseRng::new(opts.seed ^ 0xad);
        let mut worst = 0.0_f64;
        for _ in 0..200 {
            let c = random_fn(&mesh, &mut rng, 0.5, 4.0)?;
            let h = random_fn(&mesh, &mut rng, -1.0, 1.0)?;
            let zeta = random_fn(&mesh, &mut rng, -1.0, 1.0)?;
            let lin = model.linearize(&c)?;
            let err = if opts.flip_adjoint_sign {
                let w = mesh.quad_weights();
                let th = lin.derivative(&h)?;
                let tz = lin.adjoint(&zeta)?.scaled(-1.0);
                let dot = |a: &GridFunction, b: &GridFunction| -> f64 {
                    a.values()
                        .iter()
                        .zip(b.values())
                        .zip(w)
                        .map(|((x, y), wi)| wi * x * y)
                        .sum()
                };
                let scale = lr_norm(&zeta, 2.0, &mesh)? * lr_norm(&th, 2.0, &mesh)?
                    + lr_norm(&tz, 2.0, &mesh)? * lr_norm(&h, 2.0, &mesh)?;
                (dot(&zeta, &th) - dot(&tz, &h)).abs() / scale
            } else {
                adjoint_mismatch(&lin, &h, &zeta)?
            };
            worst = worst.max(err);
        }
        Ok((
            worst <= ADJOINT_TOL,
            format!("max relative mismatch {worst:.3e} (limit {ADJOINT_TOL:e})"),
        ))
    })
}

/// Forward-difference quotient error `||(F(c + eps h) - F(c)) / eps - F'(c) h||`
/// for eps = 1e-1 .. 1e-4; returns the three successive decay ratios.
pub fn fd_decay_ratios(model: &ForwardModel, c: &GridFunction, h: &GridFunction) -> Result<Vec<f64>> {
    let mesh = model.mesh();
    let lin = model.linearize(c)?;
    let th = lin.derivative(h)?;
    let u = lin.state().clone();
    let mut errs = Vec::new();
    for k in 1..=4 {
        let eps = 10f64.powi(-k);
        let up = forward(model, &c.lin_comb(1.0, h, eps)?)?;
        let quotient = up.lin_comb(1.0 / eps, &u, -1.0 / eps)?;
        errs.push(lr_norm(&quotient.sub(&th)?, 2.0, mesh)?);
    }
    Ok(errs.windows(2).map(|w| w[0] / w[1]).collect())
}

pub fn gradient_suite(opts: &SelftestOptions) -> SuiteReport {
    timed("gradient", || {
        let model = unit_model(Mesh::interval(64)?)?;
        let mesh = model.mesh().clone();
        let mut rng = NoiseRng::new(opts.seed ^ 0x9d);
        let (lo, hi) = FD_RATIO_RANGE;
        let mut all = Vec::new();
        for _ in 0..5 {
            let phase = rng.uniform() * 6.0;
            let c = GridFunction::from_fn(&mesh, |p| 2.0 + 0.5 * (3.0 * p[0] + phase).sin());
            let h = random_fn(&mesh, &mut rng, -1.0, 1.0)?;
            all.extend(fd_decay_ratios(&model, &c, &h)?);
        }
        let ok = all.iter().all(|r| (lo..=hi).contains(r));
        let (mn, mx) = all
            .iter()
            .fold((f64::INFINITY, 0.0_f64), |(a, b), &r| (a.min(r), b.max(r)));
        Ok((
            ok,
            format!("decay ratios in [{mn:.3}, {mx:.3}] (required [{lo}, {hi}])"),
        ))
    })
}

/// Discrete L^2 errors against `u = cos(pi x)` (1D, `c = 2 + x^2`) and
/// `u = cos(pi x) cos(pi y)` (2D, `c = 1 + x^2 + y^2`); both satisfy the
/// Neumann condition on `[-1, 1]^d`.
pub fn manufactured_errors(dimension: usize, resolutions: &[usize]) -> Result<Vec<f64>> {
    use std::f64::consts::PI;
    let mut errs = Vec::new();
    for &n in resolutions {
        let mesh = if dimension == 1 {
            Mesh::interval(n)?
        } else {
            Mesh::square(n)?
        };
        type Field = fn([f64; 2]) -> f64;
        let (exact, pot, lap): (Field, Field, f64) = if dimension == 1 {
            (|p| (PI * p[0]).cos(), |p| 2.0 + p[0] * p[0], PI * PI)
        } else {
            (
                |p| (PI * p[0]).cos() * (PI * p[1]).cos(),
                |p| 1.0 + p[0] * p[0] + p[1] * p[1],
                2.0 * PI * PI,
            )
        };
        let f = GridFunction::from_fn(&mesh, |p| (lap + pot(p)) * exact(p));
        let c = GridFunction::from_fn(&mesh, pot);
        let u_exact = GridFunction::from_fn(&mesh, exact);
        let model = ForwardModel::new(mesh.clone(), f)?;
        let u = forward(&model, &c)?;
        errs.push(lr_norm(&u.sub(&u_exact)?, 2.0, &mesh)?);
    }
    Ok(errs)
}

pub fn manufactured_suite() -> SuiteReport {
    timed("manufactured", || {
        let mut ratios = Vec::new();
        for (dim, res) in [(1, vec![16, 32, 64, 128]), (2, vec![8, 16, 32])] {
            let e = manufactured_errors(dim, &res)?;
            ratios.extend(e.windows(2).map(|w| w[0] / w[1]));
        }
        let worst = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok((
            worst >= MMS_MIN_RATIO,
            format!("min error ratio per halving {worst:.3} (required >= {MMS_MIN_RATIO})"),
        ))
    })
}

/// Case-I closed form, written out independently of the production map.
fn l1_closed_form(xi: f64, beta: f64) -> f64 {
    match xi {
        v if v > 1.0 => beta * (v - 1.0),
        v if v < -1.0 => beta * (v + 1.0),
        _ => 0.0,
    }
}

pub fn l1_prox_suite(opts: &SelftestOptions) -> SuiteReport {
    timed("l1-prox", || {
        let mesh = Mesh::interval(64)?;
        let mut rng = NoiseRng::new(opts.seed ^ 0x11);
        let mut mismatches = 0usize;
        let mut checked = 0usize;
        for trial in 0..50 {
            let beta = 0.1 + 20.0 * rng.uniform();
            let mut v: Vec<f64> = (0..mesh.node_count()).map(|_| -3.0 + 6.0 * rng.uniform()).collect();
            // hit the kinks exactly
            v[trial % 60] = 1.0;
            v[(trial + 7) % 60] = -1.0;
            let xi = GridFunction::new(&mesh, v)?;
            let spec = PenaltySpec::new(PenaltyKind::L2L1, beta)?;
            let x = conjugate_grad(&spec, &xi, &mesh)?;
            for (&got, &s) in x.values().iter().zip(xi.values()) {
                checked += 1;
                if got != l1_closed_form(s, beta) {
                    mismatches += 1;
                }
            }
        }
        Ok((
            mismatches == 0,
            format!("{mismatches} of {checked} nodes differ from the closed form"),
        ))
    })
}

/// Both TV solvers against the taut-string oracle on 50 random 8-node signals,
/// plus `fista_rof` with weight 0.3.
pub fn tv_prox_suite(opts: &SelftestOptions) -> SuiteReport {
    timed("tv-prox", || {
        let mesh = Mesh::interval(7)?;
        let w = mesh.quad_weights().to_vec();
        let mut rng = NoiseRng::new(opts.seed ^ 0x7f);
        let mut worst = 0.0_f64;
        let max_dev = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        for _ in 0..50 {
            let beta = 0.05 + 3.0 * rng.uniform();
            let xi: Vec<f64> = (0..8).map(|_| 2.0 * rng.standard_normal()).collect();
            let data: Vec<f64> = xi.iter().map(|v| beta * v).collect();
            let want = taut_string(&data, &w, beta);
            let xi = GridFunction::new(&mesh, xi)?;
            for (solver, iters, tol) in [(TvSolver::Auto, 500, 1e-6), (TvSolver::Fista, 200_000, 1e-13)] {
                let mut spec = PenaltySpec::with_inner(PenaltyKind::L2TV, beta, iters, tol)?;
                spec.tv_solver = solver;
                let got = conjugate_grad(&spec, &xi, &mesh)?;
                worst = worst.max(max_dev(got.values(), &want));
            }
            let raw: Vec<f64> = (0..8).map(|_| rng.standard_normal()).collect();
            let got = fista_rof(&GridFunction::new(&mesh, raw.clone())?, 0.3, &mesh, 200_000, 1e-13)?;
            worst = worst.max(max_dev(got.values(), &taut_string(&raw, &w, 0.3)));
        }
        Ok((
            worst <= TV_ORACLE_TOL,
            format!("max deviation from taut string {worst:.3e} (limit {TV_ORACLE_TOL:e})"),
        ))
    })
}

/// Largest relative deviation of one HPICP / LICP step from the dense
/// Hilbert-space formulas over `instances` random problems.
pub fn hilbert_reduction_error(instances: usize, seed: u64) -> Result<(f64, f64)> {
    let mut rng = NoiseRng::new(seed ^ 0x4b);
    let (mut worst_h, mut worst_l) = (0.0_f64, 0.0_f64);
    for k in 0..instances {
        let n = 6 + k % 11;
        let mesh = Mesh::interval(n)?;
        let model = unit_model(mesh.clone())?;
        let background = 2.0;
        let truth = random_fn(&mesh, &mut rng, 1.5, 3.0)?;
        let y = forward(&model, &truth)?;
        let x = random_fn(&mesh, &mut rng, -0.5, 0.5)?;
        let c = x.map(|v| v + background);
        let u = forward(&model, &c)?;
        let residual = u.sub(&y)?;
        let res_norm = lr_norm(&residual, 2.0, &mesh)?;
        // Theta = 1/2 ||x||^2, so xi = x.
        let state = IterationState {
            n: 0,
            xi: x.clone(),
            x: x.clone(),
            u,
            residual,
            res_norm,
            elapsed: 0.0,
        };
        let penalty = PenaltySpec::new(PenaltyKind::L2, 1.0)?;
        let mut cfg = SolverConfig::new(Method::Hpicp, 2.0, 1.5, 1.0, 0.0);
        cfg.background = background;
        cfg.step_rule = StepRule::Fixed { mu: 1.0, nu: 1.0 };

        let dense = DenseLinearization::new(&mesh, c.values(), model.source().values())?;
        let want_h = dense_hpicp_update(&dense, x.values(), y.values());
        let want_l = dense_licp_update(&dense, x.values(), y.values());
        let got_h = hpicp_step(&state, &model, &mut ConjugateMap::new(penalty), &cfg, &y)?;
        let got_l = licp_step(&state, &model, &mut ConjugateMap::new(penalty), &cfg, &y)?;
        worst_h = worst_h.max(rel_dev(got_h.x.values(), &want_h));
        worst_l = worst_l.max(rel_dev(got_l.x.values(), &want_l));
    }
    Ok((worst_h, worst_l))
}

fn rel_dev(got: &[f64], want: &[f64]) -> f64 {
    let num: f64 = got.iter().zip(want).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let den: f64 = want.iter().map(|b| b * b).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

pub fn hilbert_suite(opts: &SelftestOptions) -> SuiteReport {
    timed("hilbert", || {
        let (h, l) = hilbert_reduction_error(20, opts.seed)?;
        let ok = h <= HILBERT_TOL && l <= HILBERT_TOL;
        Ok((
            ok,
            format!("HPICP {h:.3e}, LICP {l:.3e} relative (limit {HILBERT_TOL:e})"),
        ))
    })
}

/// Runs `iterations` steps on exact data and returns the largest per-step
/// increase of `D_{xi_n} Theta(x†, x_n)` relative to its current value.
pub fn bregman_monotonicity(elements: usize, penalty: PenaltySpec, method: Method, iterations: usize) -> Result<f64> {
    let mesh = Mesh::interval(elements)?;
    let model = unit_model(mesh.clone())?;
    let background = 2.0;
    let truth = phantom_1d(&mesh)?;
    let x_true = truth.map(|v| v - background);
    let y = forward(&model, &truth)?;
    let mut cfg = SolverConfig::new(method, 2.0, 1.1, penalty.beta, 0.0);
    cfg.background = background;
    cfg.max_iters = iterations;
    let mut dists = Vec::with_capacity(iterations + 1);
    let mut err = None;
    run_with_observer(&cfg, &model, &penalty, &y, None, |s| {
        match bregman_distance(&penalty, &x_true, &s.x, &s.xi, &mesh) {
            Ok(d) => dists.push(d),
            Err(e) => err = Some(e),
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(dists
        .windows(2)
        .map(|w| (w[1] - w[0]) / w[0].abs().max(f64::MIN_POSITIVE))
        .fold(f64::NEG_INFINITY, f64::max))
}

pub fn monotonicity_suite() -> SuiteReport {
    timed("monotonicity", || {
        let mut worst = f64::NEG_INFINITY;
        for kind in [PenaltyKind::L2L1, PenaltyKind::L2TV] {
            for method in [Method::Hpicp, Method::Licp] {
                let penalty = PenaltySpec::new(kind, 20.0)?;
                worst = worst.max(bregman_monotonicity(64, penalty, method, 200)?);
            }
        }
        Ok((
            worst <= MONOTONE_TOL,
            format!("largest relative Bregman increase {worst:.3e} (limit {MONOTONE_TOL:e})"),
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        for report in run_all(&SelftestOptions::default()) {
            println!("{report}");
            assert!(report.passed, "{report}");
        }
    }

    #[test]
    fn flipped_adjoint_is_caught() {
        let opts = SelftestOptions {
            flip_adjoint_sign: true,
            ..Default::default()
        };
        assert!(!adjoint_suite(&opts).passed);
    }
}
