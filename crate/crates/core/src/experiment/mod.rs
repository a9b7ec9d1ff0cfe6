//! Potential-identification experiments: phantoms, noisy data, solver runs
//! and report files.

mod noise;
mod phantom;
pub mod report;
mod run;
mod spec;

pub use noise::NoiseRng;
pub use phantom::{phantom_1d, phantom_1d_value, phantom_2d, phantom_2d_value};
pub use report::{write_reports, write_sweep, RunSummary};
pub use run::{run_experiment, run_sweep, solver_config, ExperimentOutcome, MethodRun, SweepCell};
pub use spec::{ExperimentSpec, NoiseModel, Problem};

pub use crate::banach::relative_error;
use crate::banach::{lr_norm, GridFunction};
use crate::error::Result;
use crate::forward::ForwardModel;
use crate::mesh::Mesh;

/// Adds noise to `u_true` and returns `(u_delta, ||u_delta - u_true||_{L^r})`.
///
/// Gaussian: `u_delta = u_true + s n` with `n` i.i.d. standard normal drawn
/// in node order and `s = noise_level * max|u_true|` (or `noise_level` with
/// `absolute_noise`). Outliers: after the Gaussian draw,
/// `ceil(outlier_fraction * N)` distinct nodes are chosen and set to
/// `u_true + amplitude * sign(n_i)`.
pub fn make_noisy_data(u_true: &GridFunction, spec: &ExperimentSpec, mesh: &Mesh) -> Result<(GridFunction, f64)> {
    mesh.check(u_true.mesh_id())?;
    let u = u_true.values();
    let n = u.len();
    let peak = u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let scale = if spec.absolute_noise {
        spec.noise_level
    } else {
        spec.noise_level * peak
    };
    let mut rng = NoiseRng::new(spec.seed);
    let normals: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
    let mut noisy: Vec<f64> = u.iter().zip(&normals).map(|(v, z)| v + scale * z).collect();
    if spec.noise_model == NoiseModel::Outliers {
        let count = (spec.outlier_fraction * n as f64).ceil() as usize;
        let amplitude = spec.outlier_amplitude.unwrap_or(10.0 * peak);
        for i in rng.choose_distinct(n, count) {
            let sign = if normals[i] < 0.0 { -1.0 } else { 1.0 };
            noisy[i] = u[i] + amplitude * sign;
        }
    }
    let u_delta = GridFunction::new(mesh, noisy)?;
    let delta_eff = lr_norm(&u_delta.sub(u_true)?, spec.r, mesh)?;
    Ok((u_delta, delta_eff))
}

/// Mesh, forward model with `f = 1`, and the exact potential for `spec`.
pub fn build_problem(spec: &ExperimentSpec) -> Result<(ForwardModel, GridFunction)> {
    let (mesh, truth) = match spec.problem {
        Problem::Pot1d => {
            let mesh = Mesh::interval(spec.elements)?;
            let truth = phantom_1d(&mesh)?;
            (mesh, truth)
        }
        Problem::Pot2d => {
            let mesh = Mesh::square(spec.cells_per_side()?)?;
            let truth = phantom_2d(&mesh)?;
            (mesh, truth)
        }
    };
    let f = GridFunction::constant(&mesh, 1.0);
    Ok((ForwardModel::new(mesh, f)?, truth))
}
