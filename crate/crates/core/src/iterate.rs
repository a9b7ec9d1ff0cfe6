//! HPICP and LICP outer iterations with the discrepancy principle.
//!
//! The unknown potential is written as `c = background + x`, where `x` is the
//! variable carried by the iteration and penalized by `Theta`. Both methods
//! update the dual variable `xi` and recover `x = grad Theta*(xi)`:
//!
//! * LICP:  `xi' = xi - mu T* J_r(F(x) - y)`
//! * HPICP: `xi' = xi - mu T* (2 r - nu J_r(T T* r))`, `r = J_r(F(x) - y)`
//!
//! with `T = F'(background + x)` and the X-side duality map the identity
//! (X = L^2).

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::banach::{duality_map, lr_norm, relative_error, Exponents, GridFunction};
use crate::error::{Error, Result};
use crate::forward::{ForwardModel, Linearization};
use crate::penalty::{initial_subgradient, ConjugateMap, PenaltySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Hpicp,
    Licp,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Hpicp => "hpicp",
            Self::Licp => "licp",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hpicp" => Ok(Self::Hpicp),
            "licp" => Ok(Self::Licp),
            _ => Err(Error::Config(format!("unknown method `{s}`"))),
        }
    }
}

/// How `nu_n` is chosen under [`StepRule::Practical`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NuRule {
    /// `||g||^2 / ||T* J_r(T g)||^2`.
    AdjointRatio,
    /// `||g||^2 / <J_r(T g), T g> = ||g||^2 / ||T g||_r^r`; at `r = 2` the
    /// Rayleigh quotient of `T* T` along `g`.
    Rayleigh,
    /// `||r||_{r*} / ||J_r(T g)||_{r*}`.
    DualRatio,
}

/// How `mu_n` and `nu_n` are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StepRule {
    /// `mu = mu0 ||F(x) - y||^{(p-1) r} / ||g||^p` with `g = T* r`, and `nu`
    /// per [`NuRule`].
    Practical(NuRule),
    /// `nu = ||r||_{r*} / ||J_r(T g)||_{r*}`,
    /// `mu = mu0 B0^{-p} ||F(x) - y||^{p - r}`.
    Theoretical { b0: f64 },
    /// Constant steps.
    Fixed { mu: f64, nu: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: Method,
    pub r: f64,
    pub tau: f64,
    pub mu0: f64,
    pub delta_eff: f64,
    pub max_iters: usize,
    /// Smallest admissible step-size denominator; below it the run stagnates.
    pub nu_floor: f64,
    pub step_rule: StepRule,
    /// Known constant reference potential: `c = background + x`.
    pub background: f64,
    /// Absolute residual target used when `delta_eff == 0`.
    pub exact_data_floor: f64,
    pub stagnation_window: usize,
    pub stagnation_rel: f64,
}

impl SolverConfig {
    pub const DEFAULT_NU_FLOOR: f64 = 1e-300;
    /// TV runs sit on residual plateaus for tens of thousands of steps while
    /// the dual variable accumulates, so the window must be long.
    pub const DEFAULT_STAGNATION_WINDOW: usize = 100_000;

    /// Defaults with `mu0 = (1 - 1/tau) / beta`.
    pub fn new(method: Method, r: f64, tau: f64, beta: f64, delta_eff: f64) -> Self {
        Self {
            method,
            r,
            tau,
            mu0: default_mu0(tau, beta),
            delta_eff,
            max_iters: 200_000,
            nu_floor: Self::DEFAULT_NU_FLOOR,
            step_rule: StepRule::Practical(NuRule::Rayleigh),
            background: 0.0,
            exact_data_floor: 1e-12,
            stagnation_window: Self::DEFAULT_STAGNATION_WINDOW,
            stagnation_rel: 1e-14,
        }
    }

    pub fn validate(&self) -> Result<()> {
        Exponents::new(self.r)?;
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if !(self.tau > 1.0) {
            return bad("tau must be > 1");
        }
        if !(self.mu0 > 0.0) {
            return bad("mu0 must be > 0");
        }
        if !(self.delta_eff >= 0.0) {
            return bad("delta_eff must be >= 0");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive");
        }
        if !(self.nu_floor > 0.0) {
            return bad("nu_floor must be > 0");
        }
        if let StepRule::Theoretical { b0 } = self.step_rule {
            if !(b0 > 0.0) {
                return bad("B0 must be > 0");
            }
        }
        Ok(())
    }

    pub fn stopping_rule(&self) -> DiscrepancyRule {
        if self.delta_eff > 0.0 {
            DiscrepancyRule {
                threshold: self.tau * self.delta_eff,
            }
        } else {
            DiscrepancyRule {
                threshold: self.exact_data_floor,
            }
        }
    }
}

pub fn default_mu0(tau: f64, beta: f64) -> f64 {
    (1.0 - 1.0 / tau) / beta
}

/// Stop at the first `n` with `||F(x_n) - y|| <= threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscrepancyRule {
    pub threshold: f64,
}

impl DiscrepancyRule {
    pub fn satisfied(&self, res_norm: f64) -> bool {
        res_norm <= self.threshold
    }

    pub fn first_index(&self, res_norms: impl IntoIterator<Item = f64>) -> Option<usize> {
        res_norms.into_iter().position(|r| self.satisfied(r))
    }
}

#[derive(Debug, Clone)]
pub struct IterationState {
    pub n: usize,
    pub x: GridFunction,
    pub xi: GridFunction,
    pub u: GridFunction,
    pub residual: GridFunction,
    pub res_norm: f64,
    pub elapsed: f64,
}

impl IterationState {
    /// `x_0 = xi_0 = 0`.
    pub fn initial(
        model: &ForwardModel,
        penalty: &PenaltySpec,
        config: &SolverConfig,
        u_delta: &GridFunction,
    ) -> Result<Self> {
        let mesh = model.mesh();
        mesh.check(u_delta.mesh_id())?;
        let x = GridFunction::zeros(mesh);
        let xi = initial_subgradient(penalty, &x)?;
        Self::from_parts(0, x, xi, model, config, u_delta, None)
    }

    fn from_parts(
        n: usize,
        x: GridFunction,
        xi: GridFunction,
        model: &ForwardModel,
        config: &SolverConfig,
        u_delta: &GridFunction,
        guess: Option<&GridFunction>,
    ) -> Result<Self> {
        if !x.is_finite() || !xi.is_finite() {
            return Err(Error::NonFinite("iteration update"));
        }
        let c = potential(&x, config.background);
        let u = model.linearize_with_guess(&c, guess)?.into_state();
        let (residual, res_norm) = residual_norm(&u, u_delta, config.r, model)?;
        Ok(Self {
            n,
            x,
            xi,
            u,
            residual,
            res_norm,
            elapsed: 0.0,
        })
    }

    /// `c = background + x`.
    pub fn potential(&self, background: f64) -> GridFunction {
        potential(&self.x, background)
    }
}

fn potential(x: &GridFunction, background: f64) -> GridFunction {
    x.map(|v| background + v)
}

fn residual_norm(
    u: &GridFunction,
    u_delta: &GridFunction,
    r: f64,
    model: &ForwardModel,
) -> Result<(GridFunction, f64)> {
    let residual = u.sub(u_delta)?;
    let norm = lr_norm(&residual, r, model.mesh())?;
    Ok((residual, norm))
}

/// `(J_r(u - u_delta), ||u - u_delta||_{L^r})`.
pub fn residual_dual(
    u: &GridFunction,
    u_delta: &GridFunction,
    r: f64,
    model: &ForwardModel,
) -> Result<(GridFunction, f64)> {
    let (residual, norm) = residual_norm(u, u_delta, r, model)?;
    Ok((duality_map(&residual, r)?, norm))
}

/// Quantities entering one update, all evaluated at the current iterate.
#[derive(Debug, Clone)]
pub struct Directions {
    /// `r_n = J_r(F(x_n) - y)`.
    pub dual_residual: GridFunction,
    /// `g = T* r_n`.
    pub gradient: GridFunction,
    /// `T* J_r(T g)`; only for HPICP.
    pub correction: Option<GridFunction>,
    /// `T g`; only for HPICP.
    pub response: Option<GridFunction>,
    /// `J_r(T g)`; only for HPICP.
    pub dual_response: Option<GridFunction>,
}

pub fn directions(lin: &Linearization<'_>, state: &IterationState, config: &SolverConfig) -> Result<Directions> {
    let dual_residual = duality_map(&state.residual, config.r)?;
    let gradient = lin.adjoint(&dual_residual)?;
    let (correction, response, dual_response) = match config.method {
        Method::Licp => (None, None, None),
        Method::Hpicp => {
            let tg = lin.derivative(&gradient)?;
            let jtg = duality_map(&tg, config.r)?;
            (Some(lin.adjoint(&jtg)?), Some(tg), Some(jtg))
        }
    };
    Ok(Directions {
        dual_residual,
        gradient,
        correction,
        response,
        dual_response,
    })
}

/// `(mu, nu)`; `nu` is 0 for LICP.
pub fn step_sizes(
    state: &IterationState,
    dirs: &Directions,
    model: &ForwardModel,
    config: &SolverConfig,
) -> Result<(f64, f64)> {
    let mesh = model.mesh();
    if !(state.res_norm > 0.0) {
        return Err(Error::InvalidParameter("step sizes need a nonzero residual".into()));
    }
    let g_norm = lr_norm(&dirs.gradient, 2.0, mesh)?;
    if g_norm == 0.0 {
        return Err(Error::Stagnation(format!(
            "gradient T* r vanishes at n = {} with residual {:e}",
            state.n, state.res_norm
        )));
    }
    let p = Exponents::P;
    match config.step_rule {
        StepRule::Fixed { mu, nu } => Ok((mu, if config.method == Method::Hpicp { nu } else { 0.0 })),
        StepRule::Practical(nu_rule) => {
            let denom = g_norm.powf(p);
            if denom < config.nu_floor {
                return Err(Error::Stagnation(format!("||T* r||^p underflows at n = {}", state.n)));
            }
            let mu = config.mu0 * state.res_norm.powf((p - 1.0) * config.r) / denom;
            let nu = match config.method {
                Method::Licp => 0.0,
                Method::Hpicp => nu_value(nu_rule, g_norm, state, dirs, model, config)?,
            };
            Ok((mu, nu))
        }
        StepRule::Theoretical { b0 } => {
            let mu = config.mu0 * b0.powf(-p) * state.res_norm.powf(p - config.r);
            let nu = match config.method {
                Method::Licp => 0.0,
                Method::Hpicp => nu_value(NuRule::DualRatio, g_norm, state, dirs, model, config)?,
            };
            Ok((mu, nu))
        }
    }
}

fn nu_value(
    rule: NuRule,
    g_norm: f64,
    state: &IterationState,
    dirs: &Directions,
    model: &ForwardModel,
    config: &SolverConfig,
) -> Result<f64> {
    let mesh = model.mesh();
    let missing = || Error::InvalidParameter("HPICP step sizes need the correction term".into());
    let (num, den) = match rule {
        NuRule::AdjointRatio => {
            let q = dirs.correction.as_ref().ok_or_else(missing)?;
            (g_norm * g_norm, lr_norm(q, 2.0, mesh)?.powi(2))
        }
        NuRule::Rayleigh => {
            let tg = dirs.response.as_ref().ok_or_else(missing)?;
            (g_norm * g_norm, lr_norm(tg, config.r, mesh)?.powf(config.r))
        }
        NuRule::DualRatio => {
            let jtg = dirs.dual_response.as_ref().ok_or_else(missing)?;
            let r_star = Exponents::new(config.r)?.r_star();
            (lr_norm(&dirs.dual_residual, r_star, mesh)?, lr_norm(jtg, r_star, mesh)?)
        }
    };
    if den < config.nu_floor {
        return Err(Error::Stagnation(format!("nu denominator vanishes at n = {}", state.n)));
    }
    Ok(num / den)
}

/// `xi - mu (2 g - nu q)` for HPICP, `xi - mu g` for LICP.
pub fn dual_update(xi: &GridFunction, dirs: &Directions, mu: f64, nu: f64, method: Method) -> Result<GridFunction> {
    match (method, &dirs.correction) {
        (Method::Hpicp, Some(q)) => {
            let dir = dirs.gradient.lin_comb(2.0, q, -nu)?;
            xi.lin_comb(1.0, &dir, -mu)
        }
        (Method::Hpicp, None) => Err(Error::InvalidParameter("HPICP update needs the correction term".into())),
        (Method::Licp, _) => xi.lin_comb(1.0, &dirs.gradient, -mu),
    }
}

/// One outer step of the method selected in `config`.
pub fn step(
    state: &IterationState,
    model: &ForwardModel,
    penalty: &mut ConjugateMap,
    config: &SolverConfig,
    u_delta: &GridFunction,
) -> Result<IterationState> {
    if state.res_norm == 0.0 {
        let mut next = state.clone();
        next.n += 1;
        return Ok(next);
    }
    let c = state.potential(config.background);
    let lin = model.linearize_with_guess(&c, Some(&state.u))?;
    let dirs = directions(&lin, state, config)?;
    let (mu, nu) = step_sizes(state, &dirs, model, config)?;
    let xi = dual_update(&state.xi, &dirs, mu, nu, config.method)?;
    let x = penalty.apply(&xi, model.mesh())?;
    let mut next = IterationState::from_parts(state.n + 1, x, xi, model, config, u_delta, Some(&state.u))?;
    next.elapsed = state.elapsed;
    Ok(next)
}

pub fn hpicp_step(
    state: &IterationState,
    model: &ForwardModel,
    penalty: &mut ConjugateMap,
    config: &SolverConfig,
    u_delta: &GridFunction,
) -> Result<IterationState> {
    let cfg = SolverConfig {
        method: Method::Hpicp,
        ..config.clone()
    };
    step(state, model, penalty, &cfg, u_delta)
}

pub fn licp_step(
    state: &IterationState,
    model: &ForwardModel,
    penalty: &mut ConjugateMap,
    config: &SolverConfig,
    u_delta: &GridFunction,
) -> Result<IterationState> {
    let cfg = SolverConfig {
        method: Method::Licp,
        ..config.clone()
    };
    step(state, model, penalty, &cfg, u_delta)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Discrepancy,
    MaxIters,
    Stagnation,
    /// A forward, adjoint or inner solve failed.
    Failed(String),
}

impl StopReason {
    pub fn is_failure(&self) -> bool {
        matches!(self, Self::Failed(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub n: usize,
    pub res_norm: f64,
    pub relative_error: Option<f64>,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone)]
pub struct RunHistory {
    pub records: Vec<IterationRecord>,
    pub stop_reason: StopReason,
    /// Index of the returned iterate; the first discrepancy-satisfying index
    /// when `stop_reason == Discrepancy`.
    pub n_delta: usize,
    pub final_state: IterationState,
    /// Reconstructed potential `background + x_{n_delta}`.
    pub reconstruction: GridFunction,
    pub elapsed_s: f64,
}

impl RunHistory {
    pub fn final_relative_error(&self) -> Option<f64> {
        self.records.last().and_then(|r| r.relative_error)
    }
}

/// Iterates until the discrepancy principle, `max_iters`, stagnation or a
/// solver failure. `truth` is the exact potential `c†`, used only for
/// reporting relative errors.
pub fn run(
    config: &SolverConfig,
    model: &ForwardModel,
    penalty: &PenaltySpec,
    u_delta: &GridFunction,
    truth: Option<&GridFunction>,
) -> Result<RunHistory> {
    run_with_observer(config, model, penalty, u_delta, truth, |_| {})
}

/// As [`run`], calling `observe` on every iterate including the initial one.
pub fn run_with_observer(
    config: &SolverConfig,
    model: &ForwardModel,
    penalty: &PenaltySpec,
    u_delta: &GridFunction,
    truth: Option<&GridFunction>,
    mut observe: impl FnMut(&IterationState),
) -> Result<RunHistory> {
    config.validate()?;
    penalty.validate()?;
    let mesh = model.mesh();
    let start = Instant::now();
    let rule = config.stopping_rule();
    let mut map = ConjugateMap::new(*penalty);
    let mut state = IterationState::initial(model, penalty, config, u_delta)?;
    let rel_err = |s: &IterationState| -> Result<Option<f64>> {
        truth
            .map(|t| relative_error(&s.potential(config.background), t, mesh))
            .transpose()
    };

    let mut records = vec![IterationRecord {
        n: 0,
        res_norm: state.res_norm,
        relative_error: rel_err(&state)?,
        elapsed_s: start.elapsed().as_secs_f64(),
    }];
    observe(&state);

    let mut best = state.res_norm;
    let mut since_best = 0usize;
    let stop_reason = loop {
        if rule.satisfied(state.res_norm) {
            break StopReason::Discrepancy;
        }
        if state.n >= config.max_iters {
            break StopReason::MaxIters;
        }
        let next = match step(&state, model, &mut map, config, u_delta) {
            Ok(s) => s,
            Err(Error::Stagnation(_)) => break StopReason::Stagnation,
            Err(e) => break StopReason::Failed(e.to_string()),
        };
        state = next;
        state.elapsed = start.elapsed().as_secs_f64();
        records.push(IterationRecord {
            n: state.n,
            res_norm: state.res_norm,
            relative_error: rel_err(&state)?,
            elapsed_s: state.elapsed,
        });
        observe(&state);

        if state.res_norm < best * (1.0 - config.stagnation_rel) {
            best = state.res_norm;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.stagnation_window {
                break StopReason::Stagnation;
            }
        }
    };

    let reconstruction = state.potential(config.background);
    Ok(RunHistory {
        records,
        stop_reason,
        n_delta: state.n,
        reconstruction,
        final_state: state,
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh;
    use crate::penalty::PenaltyKind;

    #[test]
    fn mu0_default() {
        let mu0 = default_mu0(1.1, 20.0);
        assert!((mu0 - 4.545_454_545_454_5e-3).abs() < 1e-15);
    }

    #[test]
    fn discrepancy_first_index() {
        let rule = DiscrepancyRule { threshold: 2.0 };
        assert_eq!(rule.first_index([5.0, 3.0, 1.9, 2.5, 1.0]), Some(2));
        assert_eq!(rule.first_index([5.0, 3.0]), None);
    }

    #[test]
    fn residual_dual_cases() {
        let mesh = Mesh::interval(4).unwrap();
        let model = ForwardModel::new(mesh.clone(), GridFunction::constant(&mesh, 1.0)).unwrap();
        let u = GridFunction::new(&mesh, vec![0.5, -1.0, 2.0, 0.0, 3.0]).unwrap();
        let (j, n) = residual_dual(&u, &u, 1.5, &model).unwrap();
        assert!(j.is_zero());
        assert_eq!(n, 0.0);

        let zero = GridFunction::zeros(&mesh);
        let (j, n) = residual_dual(&u, &zero, 2.0, &model).unwrap();
        assert_eq!(j, u);
        assert!((n - lr_norm(&u, 2.0, &mesh).unwrap()).abs() < 1e-15);

        let (j, _) = residual_dual(&u, &zero, 1.05, &model).unwrap();
        for (a, v) in j.values().iter().zip(u.values()) {
            let e = if *v == 0.0 {
                0.0
            } else {
                v.abs().powf(0.05) * v.signum()
            };
            assert!((a - e).abs() < 1e-15);
        }
    }

    fn small_problem(method: Method) -> (ForwardModel, PenaltySpec, SolverConfig, GridFunction, GridFunction) {
        let mesh = Mesh::interval(32).unwrap();
        let model = ForwardModel::new(mesh.clone(), GridFunction::constant(&mesh, 1.0)).unwrap();
        let truth = GridFunction::from_fn(&mesh, |p| if p[0].abs() < 0.3 { 2.5 } else { 2.0 });
        let data = crate::forward::forward(&model, &truth).unwrap();
        let penalty = PenaltySpec::new(PenaltyKind::L2L1, 5.0).unwrap();
        let mut config = SolverConfig::new(method, 2.0, 1.5, 5.0, 0.0);
        config.background = 2.0;
        config.max_iters = 2000;
        (model, penalty, config, data, truth)
    }

    #[test]
    fn exact_fixed_point() {
        let (model, penalty, config, _, truth) = small_problem(Method::Hpicp);
        // data generated from x = 0 itself
        let data = crate::forward::forward(&model, &GridFunction::constant(model.mesh(), 2.0)).unwrap();
        let state = IterationState::initial(&model, &penalty, &config, &data).unwrap();
        assert_eq!(state.res_norm, 0.0);
        let mut map = ConjugateMap::new(penalty);
        for method in [Method::Hpicp, Method::Licp] {
            let cfg = SolverConfig {
                method,
                ..config.clone()
            };
            let next = step(&state, &model, &mut map, &cfg, &data).unwrap();
            assert_eq!(next.xi, state.xi);
            assert_eq!(next.x, state.x);
            assert_eq!(next.n, 1);
        }
        let hist = run(&config, &model, &penalty, &data, Some(&truth)).unwrap();
        assert_eq!(hist.n_delta, 0);
        assert_eq!(hist.stop_reason, StopReason::Discrepancy);
        assert_eq!(hist.records.len(), 1);
    }

    #[test]
    fn zero_nu_is_doubled_licp() {
        let (model, penalty, config, data, _) = small_problem(Method::Hpicp);
        let state = IterationState::initial(&model, &penalty, &config, &data).unwrap();
        let mut map = ConjugateMap::new(penalty);
        let hp = SolverConfig {
            step_rule: StepRule::Fixed { mu: 0.3, nu: 0.0 },
            ..config.clone()
        };
        let li = SolverConfig {
            step_rule: StepRule::Fixed { mu: 0.6, nu: 0.0 },
            ..config.clone()
        };
        let a = hpicp_step(&state, &model, &mut map, &hp, &data).unwrap();
        let b = licp_step(&state, &model, &mut map, &li, &data).unwrap();
        for (x, y) in a.xi.values().iter().zip(b.xi.values()) {
            assert!((x - y).abs() <= 1e-14 * x.abs().max(1e-300));
        }
    }

    #[test]
    fn licp_ignores_nu() {
        let (model, penalty, config, data, _) = small_problem(Method::Licp);
        let state = IterationState::initial(&model, &penalty, &config, &data).unwrap();
        let lin = model.linearize(&state.potential(config.background)).unwrap();
        let dirs = directions(&lin, &state, &config).unwrap();
        assert!(dirs.correction.is_none());
        let (_, nu) = step_sizes(&state, &dirs, &model, &config).unwrap();
        assert_eq!(nu, 0.0);
        let fixed = SolverConfig {
            step_rule: StepRule::Fixed { mu: 1.0, nu: 5.0 },
            ..config
        };
        assert_eq!(step_sizes(&state, &dirs, &model, &fixed).unwrap().1, 0.0);
    }

    #[test]
    fn runs_decrease_residual() {
        for method in [Method::Hpicp, Method::Licp] {
            let (model, penalty, config, data, truth) = small_problem(method);
            let hist = run(&config, &model, &penalty, &data, Some(&truth)).unwrap();
            assert_eq!(hist.stop_reason, StopReason::MaxIters);
            assert_eq!(hist.n_delta, 2000);
            assert!(hist.records.windows(2).all(|w| w[1].n == w[0].n + 1));
            let first = hist.records[0].res_norm;
            let last = hist.records.last().unwrap().res_norm;
            assert!(last < 0.5 * first, "{method}: {first} -> {last}");
        }
    }

    #[test]
    fn invalid_config_is_rejected() {
        let (model, penalty, mut config, data, _) = small_problem(Method::Hpicp);
        config.tau = 1.0;
        assert!(run(&config, &model, &penalty, &data, None).is_err());
    }
}
