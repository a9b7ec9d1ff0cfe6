//! Experiment configuration: a flat `key = value` file, each key naming one
//! [`ExperimentSpec`] field. `#` starts a comment.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iterate::{Method, NuRule};
use crate::penalty::{PenaltyKind, PenaltySpec, TvSolver};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    Pot1d,
    Pot2d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    Gaussian,
    Outliers,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub problem: Problem,
    /// Intervals in 1D; triangles in 2D (must be `2 k^2`).
    pub elements: usize,
    pub penalty: PenaltySpec,
    pub r: f64,
    pub tau: f64,
    /// `None` means `(1 - 1/tau) / beta`.
    pub mu0: Option<f64>,
    pub nu_rule: NuRule,
    /// Reference potential; the iteration reconstructs `c - background`.
    pub background: f64,
    pub noise_level: f64,
    /// Scale noise by `noise_level` alone instead of `noise_level * max|u†|`.
    pub absolute_noise: bool,
    pub noise_model: NoiseModel,
    pub outlier_fraction: f64,
    /// `None` means 10 times `max|u†|`.
    pub outlier_amplitude: Option<f64>,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub max_iters: usize,
    pub output_dir: PathBuf,
    pub parallel: bool,
    /// Grid for the `sweep` command.
    pub sweep_betas: Vec<f64>,
    pub sweep_noise_levels: Vec<f64>,
}

impl ExperimentSpec {
    /// Every key accepted by [`ExperimentSpec::set`], in config-file order.
    pub const KEYS: &'static [&'static str] = &[
        "problem",
        "elements",
        "penalty",
        "beta",
        "tv_inner_max_iters",
        "tv_inner_tol",
        "tv_solver",
        "r",
        "tau",
        "mu0",
        "nu_rule",
        "background",
        "noise_level",
        "absolute_noise",
        "noise_model",
        "outlier_fraction",
        "outlier_amplitude",
        "seed",
        "methods",
        "max_iters",
        "output_dir",
        "parallel",
        "sweep_betas",
        "sweep_noise_levels",
    ];

    /// One-dimensional potential problem on 256 elements with L^2 + TV.
    pub fn default_1d() -> Self {
        Self {
            problem: Problem::Pot1d,
            elements: 256,
            penalty: PenaltySpec::new(PenaltyKind::L2TV, 20.0).expect("valid default"),
            r: 2.0,
            tau: 1.1,
            mu0: None,
            nu_rule: NuRule::Rayleigh,
            background: 2.0,
            noise_level: 1e-3,
            absolute_noise: false,
            noise_model: NoiseModel::Gaussian,
            outlier_fraction: 0.02,
            outlier_amplitude: None,
            seed: 20_180_101,
            methods: vec![Method::Hpicp, Method::Licp],
            // LICP needs ~6e5 steps on the default 1D problem
            max_iters: 1_000_000,
            output_dir: PathBuf::from("out/pot1d"),
            parallel: false,
            sweep_betas: vec![0.025, 1.0, 5.0, 10.0, 20.0, 50.0],
            sweep_noise_levels: vec![1e-3],
        }
    }

    /// Two-dimensional potential problem on 2048 triangles with L^2 + L^1.
    pub fn default_2d() -> Self {
        Self {
            problem: Problem::Pot2d,
            elements: 2048,
            penalty: PenaltySpec::new(PenaltyKind::L2L1, 1.0).expect("valid default"),
            tau: 2.1,
            background: 1.0,
            noise_level: 1e-2,
            max_iters: 50_000,
            output_dir: PathBuf::from("out/pot2d"),
            sweep_betas: vec![1.0],
            sweep_noise_levels: vec![1e-2, 5e-3, 1e-3, 5e-4, 1e-4],
            ..Self::default_1d()
        }
    }

    pub fn default_for(problem: Problem) -> Self {
        match problem {
            Problem::Pot1d => Self::default_1d(),
            Problem::Pot2d => Self::default_2d(),
        }
    }

    pub fn mu0(&self) -> f64 {
        self.mu0
            .unwrap_or_else(|| crate::iterate::default_mu0(self.tau, self.penalty.beta))
    }

    /// Cells per side of the 2D grid.
    pub fn cells_per_side(&self) -> Result<usize> {
        let k = ((self.elements as f64) / 2.0).sqrt().round() as usize;
        if 2 * k * k != self.elements {
            return Err(Error::Config(format!(
                "2D element count must be 2 k^2 for a uniform triangulation, got {}",
                self.elements
            )));
        }
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        self.penalty.validate().map_err(|e| Error::Config(e.to_string()))?;
        let bad = |m: String| Err(Error::Config(m));
        if self.elements < 8 {
            return bad(format!("elements must be >= 8, got {}", self.elements));
        }
        if self.problem == Problem::Pot2d {
            self.cells_per_side()?;
            if self.penalty.kind == PenaltyKind::L2TV && self.penalty.tv_solver == TvSolver::Exact {
                return bad("tv_solver = exact handles 1D problems only".into());
            }
        }
        if !(self.r > 1.0) {
            return bad(format!("r must be > 1, got {}", self.r));
        }
        if !(self.tau > 1.0) {
            return bad(format!("tau must be > 1, got {}", self.tau));
        }
        if let Some(mu0) = self.mu0 {
            if !(mu0 > 0.0) {
                return bad(format!("mu0 must be > 0, got {mu0}"));
            }
        }
        if !(self.noise_level >= 0.0) {
            return bad(format!("noise_level must be >= 0, got {}", self.noise_level));
        }
        if !(0.0..=1.0).contains(&self.outlier_fraction) {
            return bad(format!(
                "outlier_fraction must lie in [0, 1], got {}",
                self.outlier_fraction
            ));
        }
        if self.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive".into());
        }
        Ok(())
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let float = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| Error::Config(format!("`{key}`: expected a number, got `{v}`")))
        };
        let int = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| Error::Config(format!("`{key}`: expected an integer, got `{v}`")))
        };
        let boolean = |v: &str| match v {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            _ => Err(Error::Config(format!("`{key}`: expected true/false, got `{v}`"))),
        };
        let auto_float = |v: &str| if v == "auto" { Ok(None) } else { float(v).map(Some) };
        let list = |v: &str| v.split(',').map(|s| float(s.trim())).collect::<Result<Vec<_>>>();
        match key {
            "problem" => {
                self.problem = match value {
                    "pot1d" => Problem::Pot1d,
                    "pot2d" => Problem::Pot2d,
                    _ => return Err(Error::Config(format!("unknown problem `{value}`"))),
                }
            }
            "elements" => self.elements = int(value)?,
            "penalty" => self.penalty.kind = value.parse()?,
            "beta" => self.penalty.beta = float(value)?,
            "tv_inner_max_iters" => self.penalty.tv_inner_max_iters = int(value)?,
            "tv_inner_tol" => self.penalty.tv_inner_tol = float(value)?,
            "tv_solver" => self.penalty.tv_solver = value.parse()?,
            "r" => self.r = float(value)?,
            "tau" => self.tau = float(value)?,
            "mu0" => self.mu0 = auto_float(value)?,
            "nu_rule" => {
                self.nu_rule = match value {
                    "adjoint_ratio" => NuRule::AdjointRatio,
                    "rayleigh" => NuRule::Rayleigh,
                    "dual_ratio" => NuRule::DualRatio,
                    _ => return Err(Error::Config(format!("unknown nu_rule `{value}`"))),
                }
            }
            "background" => self.background = float(value)?,
            "noise_level" => self.noise_level = float(value)?,
            "absolute_noise" => self.absolute_noise = boolean(value)?,
            "noise_model" => {
                self.noise_model = match value {
                    "gaussian" => NoiseModel::Gaussian,
                    "outliers" => NoiseModel::Outliers,
                    _ => return Err(Error::Config(format!("unknown noise_model `{value}`"))),
                }
            }
            "outlier_fraction" => self.outlier_fraction = float(value)?,
            "outlier_amplitude" => self.outlier_amplitude = auto_float(value)?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| Error::Config(format!("`seed`: expected a 64-bit integer, got `{value}`")))?
            }
            "methods" | "method" => {
                self.methods = match value {
                    "both" => vec![Method::Hpicp, Method::Licp],
                    v => v.split(',').map(|m| m.trim().parse()).collect::<Result<Vec<_>>>()?,
                }
            }
            "max_iters" => self.max_iters = int(value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "parallel" => self.parallel = boolean(value)?,
            "sweep_betas" => self.sweep_betas = list(value)?,
            "sweep_noise_levels" => self.sweep_noise_levels = list(value)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies every assignment in a `key = value` document.
    pub fn apply_config_text(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            self.set(key.trim(), value)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    /// Canonical `key = value` rendering; parses back to the same spec.
    pub fn to_config_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        let auto = |v: Option<f64>| v.map_or_else(|| "auto".to_string(), |x| format!("{x:?}"));
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        kv(
            "problem",
            match self.problem {
                Problem::Pot1d => "pot1d".into(),
                Problem::Pot2d => "pot2d".into(),
            },
        );
        kv("elements", self.elements.to_string());
        kv("penalty", self.penalty.kind.to_string());
        kv("beta", format!("{:?}", self.penalty.beta));
        kv("tv_inner_max_iters", self.penalty.tv_inner_max_iters.to_string());
        kv("tv_inner_tol", format!("{:?}", self.penalty.tv_inner_tol));
        kv("tv_solver", self.penalty.tv_solver.to_string());
        kv("r", format!("{:?}", self.r));
        kv("tau", format!("{:?}", self.tau));
        kv("mu0", auto(self.mu0));
        kv(
            "nu_rule",
            match self.nu_rule {
                NuRule::AdjointRatio => "adjoint_ratio".into(),
                NuRule::Rayleigh => "rayleigh".into(),
                NuRule::DualRatio => "dual_ratio".into(),
            },
        );
        kv("background", format!("{:?}", self.background));
        kv("noise_level", format!("{:?}", self.noise_level));
        kv("absolute_noise", self.absolute_noise.to_string());
        kv(
            "noise_model",
            match self.noise_model {
                NoiseModel::Gaussian => "gaussian".into(),
                NoiseModel::Outliers => "outliers".into(),
            },
        );
        kv("outlier_fraction", format!("{:?}", self.outlier_fraction));
        kv("outlier_amplitude", auto(self.outlier_amplitude));
        kv("seed", self.seed.to_string());
        kv(
            "methods",
            self.methods.iter().map(|m| m.name()).collect::<Vec<_>>().join(","),
        );
        kv("max_iters", self.max_iters.to_string());
        kv("output_dir", self.output_dir.display().to_string());
        kv("parallel", self.parallel.to_string());
        kv("sweep_betas", join(&self.sweep_betas));
        kv("sweep_noise_levels", join(&self.sweep_noise_levels));
        out
    }
}
