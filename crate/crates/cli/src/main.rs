use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hpicp_core::experiment::{self, report, ExperimentOutcome, ExperimentSpec, Problem};
use hpicp_core::selftest::{self, SelftestOptions};
use hpicp_core::{Error, Method};

const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_SELFTEST: u8 = 4;

/// Flags that clap handles itself; every other `--<key>` naming a spec field
/// is rewritten to `--set key=value`.
const NATIVE_FLAGS: &[&str] = &["seed", "parallel", "absolute_noise", "problem"];

#[derive(Parser)]
#[command(
    name = "hpicp",
    version,
    about = "Iterative regularization for potential identification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One-dimensional potential problem.
    #[command(name = "run-1d")]
    Run1d(RunArgs),
    /// Two-dimensional potential problem.
    #[command(name = "run-2d")]
    Run2d(RunArgs),
    /// Grid over `sweep_betas` x `sweep_noise_levels`.
    Sweep {
        #[arg(long, value_enum, default_value = "pot1d")]
        problem: ProblemArg,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Built-in correctness suites.
    Selftest {
        #[arg(long, default_value_t = SelftestOptions::default().seed)]
        seed: u64,
        /// Negate the adjoint (negative control; the adjoint suite must fail).
        #[arg(long, hide = true)]
        flip_adjoint_sign: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    Pot1d,
    Pot2d,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Hpicp,
    Licp,
    Both,
}

#[derive(Args)]
struct RunArgs {
    /// `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run the methods concurrently.
    #[arg(long)]
    parallel: bool,
    /// Use `noise_level` as the absolute noise scale.
    #[arg(long)]
    absolute_noise: bool,
    /// Override one spec field; any `--<key> <value>` is accepted as well.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn load_spec(problem: Problem, args: &RunArgs) -> hpicp_core::Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::default_for(problem);
    if let Some(path) = &args.config {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        spec.apply_config_text(&text)?;
    }
    for kv in &args.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{kv}` is not key=value")))?;
        spec.set(k.trim(), v.trim())?;
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(m) = args.method {
        spec.methods = match m {
            MethodArg::Hpicp => vec![Method::Hpicp],
            MethodArg::Licp => vec![Method::Licp],
            MethodArg::Both => vec![Method::Hpicp, Method::Licp],
        };
    }
    if let Some(out) = &args.out {
        spec.output_dir = out.clone();
    }
    spec.parallel |= args.parallel;
    spec.absolute_noise |= args.absolute_noise;
    if spec.problem != problem {
        return Err(Error::Config(format!(
            "config selects problem {:?} but the command runs {problem:?}",
            spec.problem
        )));
    }
    spec.validate()?;
    Ok(spec)
}

/// Rewrites `--key value` and `--key=value` for spec keys into `--set`.
fn rewrite_overrides(args: impl IntoIterator<Item = String>) -> Vec<String> {
    let mut out = Vec::new();
    let mut it = args.into_iter().peekable();
    while let Some(arg) = it.next() {
        let Some(flag) = arg.strip_prefix("--") else {
            out.push(arg);
            continue;
        };
        let (name, inline) = match flag.split_once('=') {
            Some((n, v)) => (n.replace('-', "_"), Some(v.to_string())),
            None => (flag.replace('-', "_"), None),
        };
        if !ExperimentSpec::KEYS.contains(&name.as_str()) || NATIVE_FLAGS.contains(&name.as_str()) {
            out.push(arg);
            continue;
        }
        let value = match inline {
            Some(v) => Some(v),
            None => it.next_if(|v| !v.starts_with("--")),
        };
        match value {
            Some(v) => {
                out.push("--set".into());
                out.push(format!("{name}={v}"));
            }
            // leave it to clap to report the missing value
            None => out.push(arg),
        }
    }
    out
}

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidParameter(_) | Error::Unsupported(_) => EXIT_CONFIG,
        _ => EXIT_SOLVER,
    }
}

fn print_outcome(outcome: &ExperimentOutcome) {
    println!(
        "delta_eff = {:.6e}, discrepancy threshold = {:.6e}",
        outcome.delta_eff,
        outcome.threshold()
    );
    println!("{:<6} {:>9} {:>10} {:>10}  stop", "method", "n_delta", "RE", "time_s");
    for run in &outcome.runs {
        let re = run.relative_error().map_or("-".to_string(), |e| format!("{e:.4}"));
        println!(
            "{:<6} {:>9} {:>10} {:>10.3}  {}",
            run.method.name(),
            run.history.n_delta,
            re,
            run.history.elapsed_s,
            report::stop_label(&run.history.stop_reason)
        );
        if let hpicp_core::StopReason::Failed(msg) = &run.history.stop_reason {
            eprintln!("{}: solver failed: {msg}", run.method);
        }
    }
}

fn run_single(problem: Problem, args: &RunArgs) -> Result<(), u8> {
    let spec = load_spec(problem, args).map_err(report_err)?;
    let outcome = experiment::run_experiment(&spec).map_err(report_err)?;
    experiment::write_reports(&outcome, &spec.output_dir).map_err(report_err)?;
    print_outcome(&outcome);
    println!("reports written to {}", spec.output_dir.display());
    if outcome.any_failed() {
        return Err(EXIT_SOLVER);
    }
    Ok(())
}

fn run_sweep(problem: Problem, args: &RunArgs) -> Result<(), u8> {
    let spec = load_spec(problem, args).map_err(report_err)?;
    let cells = experiment::run_sweep(&spec).map_err(report_err)?;
    experiment::write_sweep(&cells, &spec.output_dir).map_err(report_err)?;
    for cell in &cells {
        println!("beta = {}, noise_level = {}", cell.beta, cell.noise_level);
        print_outcome(&cell.outcome);
    }
    println!("reports written to {}", spec.output_dir.display());
    if cells.iter().any(|c| c.outcome.any_failed()) {
        return Err(EXIT_SOLVER);
    }
    Ok(())
}

fn report_err(err: Error) -> u8 {
    eprintln!("error: {err}");
    exit_for(&err)
}

fn main() -> ExitCode {
    let cli = Cli::parse_from(rewrite_overrides(std::env::args()));
    let result = match &cli.command {
        Command::Run1d(args) => run_single(Problem::Pot1d, args),
        Command::Run2d(args) => run_single(Problem::Pot2d, args),
        Command::Sweep { problem, run } => {
            let p = match problem {
                ProblemArg::Pot1d => Problem::Pot1d,
                ProblemArg::Pot2d => Problem::Pot2d,
            };
            run_sweep(p, run)
        }
        Command::Selftest {
            seed,
            flip_adjoint_sign,
        } => {
            let opts = SelftestOptions {
                flip_adjoint_sign: *flip_adjoint_sign,
                seed: *seed,
            };
            let reports = selftest::run_all(&opts);
            for r in &reports {
                println!("{r}");
            }
            if reports.iter().all(|r| r.passed) {
                Ok(())
            } else {
                Err(EXIT_SELFTEST)
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rw(args: &[&str]) -> Vec<String> {
        rewrite_overrides(args.iter().map(|s| s.to_string()))
    }

    #[test]
    fn rewrites_spec_keys() {
        assert_eq!(
            rw(&["hpicp", "run-1d", "--beta", "5", "--max-iters=10", "--seed", "3"]),
            [
                "hpicp",
                "run-1d",
                "--set",
                "beta=5",
                "--set",
                "max_iters=10",
                "--seed",
                "3"
            ]
        );
        assert_eq!(
            rw(&["hpicp", "run-1d", "--parallel", "--out", "x"]),
            ["hpicp", "run-1d", "--parallel", "--out", "x"]
        );
    }
}
