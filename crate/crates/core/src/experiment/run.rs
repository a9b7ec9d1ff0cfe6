use crate::banach::GridFunction;
use crate::error::{Error, Result};
use crate::forward::{self, ForwardModel};
use crate::iterate::{run, Method, RunHistory, SolverConfig, StepRule};

use super::{build_problem, make_noisy_data, ExperimentSpec};

/// One method's run within an experiment.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub method: Method,
    pub history: RunHistory,
}

impl MethodRun {
    pub fn relative_error(&self) -> Option<f64> {
        self.history.final_relative_error()
    }
}

/// Everything an experiment produces, before anything is written to disk.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub spec: ExperimentSpec,
    pub model: ForwardModel,
    pub truth: GridFunction,
    pub u_delta: GridFunction,
    pub delta_eff: f64,
    pub runs: Vec<MethodRun>,
}

impl ExperimentOutcome {
    pub fn threshold(&self) -> f64 {
        self.spec.tau * self.delta_eff
    }

    pub fn get(&self, method: Method) -> Option<&MethodRun> {
        self.runs.iter().find(|r| r.method == method)
    }

    pub fn any_failed(&self) -> bool {
        self.runs.iter().any(|r| r.history.stop_reason.is_failure())
    }
}

pub fn solver_config(spec: &ExperimentSpec, method: Method, delta_eff: f64) -> SolverConfig {
    let mut config = SolverConfig::new(method, spec.r, spec.tau, spec.penalty.beta, delta_eff);
    config.mu0 = spec.mu0();
    config.max_iters = spec.max_iters;
    config.background = spec.background;
    config.step_rule = StepRule::Practical(spec.nu_rule);
    config
}

/// Builds the problem, draws the data and runs every requested method on the
/// same `u^δ`. With `spec.parallel` the methods run on separate threads; the
/// results do not depend on it.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    spec.validate()?;
    let (model, truth) = build_problem(spec)?;
    let u_true = forward::forward(&model, &truth)?;
    let (u_delta, delta_eff) = make_noisy_data(&u_true, spec, model.mesh())?;

    let run_one = |method: Method| -> Result<MethodRun> {
        let config = solver_config(spec, method, delta_eff);
        let history = run(&config, &model, &spec.penalty, &u_delta, Some(&truth))?;
        Ok(MethodRun { method, history })
    };

    let runs: Vec<MethodRun> = if spec.parallel && spec.methods.len() > 1 {
        std::thread::scope(|s| {
            let handles: Vec<_> = spec.methods.iter().map(|&m| s.spawn(move || run_one(m))).collect();
            handles
                .into_iter()
                .map(|h| {
                    h.join()
                        .unwrap_or_else(|_| Err(Error::Solve("solver thread panicked".into())))
                })
                .collect::<Result<_>>()
        })?
    } else {
        spec.methods.iter().map(|&m| run_one(m)).collect::<Result<_>>()?
    };

    Ok(ExperimentOutcome {
        spec: spec.clone(),
        model,
        truth,
        u_delta,
        delta_eff,
        runs,
    })
}

/// One cell of a `β × δ` sweep.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub beta: f64,
    pub noise_level: f64,
    pub outcome: ExperimentOutcome,
}

/// Runs `spec` once per `(β, δ)` pair of `sweep_betas × sweep_noise_levels`,
/// betas outermost.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<Vec<SweepCell>> {
    spec.validate()?;
    if spec.sweep_betas.is_empty() || spec.sweep_noise_levels.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    let mut cells = Vec::new();
    for &beta in &spec.sweep_betas {
        for &noise_level in &spec.sweep_noise_levels {
            let mut cell = spec.clone();
            cell.penalty.beta = beta;
            cell.noise_level = noise_level;
            let outcome = run_experiment(&cell)?;
            cells.push(SweepCell {
                beta,
                noise_level,
                outcome,
            });
        }
    }
    Ok(cells)
}
