//! Report files. Floats are written with 17 significant digits so that the
//! CSV files round-trip exactly and runs can be compared byte for byte.
//!
//! Layout under the output directory:
//!
//! ```text
//! config.txt            echo of the experiment spec (loadable with --config)
//! re_vs_time.svg        relative error against wall time, one line per method
//! <method>/history.csv  n,res_norm,relative_error
//! <method>/timing.csv   n,elapsed_s
//! <method>/reconstruction.csv  x,y,c,c_true
//! <method>/summary.json
//! ```

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::iterate::StopReason;

use super::{ExperimentOutcome, ExperimentSpec, MethodRun, SweepCell};

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path)?))
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub method: String,
    pub n_delta: usize,
    pub stop_reason: StopReason,
    pub relative_error: Option<f64>,
    pub final_res_norm: f64,
    pub delta_eff: f64,
    pub discrepancy_threshold: f64,
    pub elapsed_s: f64,
    pub spec: ExperimentSpec,
}

impl RunSummary {
    pub fn new(outcome: &ExperimentOutcome, run: &MethodRun) -> Self {
        Self {
            method: run.method.name().to_string(),
            n_delta: run.history.n_delta,
            stop_reason: run.history.stop_reason.clone(),
            relative_error: run.relative_error(),
            final_res_norm: run.history.final_state.res_norm,
            delta_eff: outcome.delta_eff,
            discrepancy_threshold: outcome.threshold(),
            elapsed_s: run.history.elapsed_s,
            spec: outcome.spec.clone(),
        }
    }
}

pub fn write_history(run: &MethodRun, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "n,res_norm,relative_error")?;
    for r in &run.history.records {
        writeln!(w, "{},{},{}", r.n, num(r.res_norm), opt_num(r.relative_error))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_timing(run: &MethodRun, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "n,elapsed_s")?;
    for r in &run.history.records {
        writeln!(w, "{},{}", r.n, num(r.elapsed_s))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_reconstruction(outcome: &ExperimentOutcome, run: &MethodRun, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "x,y,c,c_true")?;
    let mesh = outcome.model.mesh();
    let c = run.history.reconstruction.values();
    for ((p, ci), ti) in mesh.coords().iter().zip(c).zip(outcome.truth.values()) {
        writeln!(w, "{},{},{},{}", num(p[0]), num(p[1]), num(*ci), num(*ti))?;
    }
    w.flush()?;
    Ok(())
}

const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Relative error against elapsed time, one polyline per run. Long histories
/// are thinned to at most ~2000 points per line.
pub fn re_vs_time_svg(outcome: &ExperimentOutcome) -> String {
    let (w, h, left, right, top, bottom) = (640.0, 400.0, 70.0, 20.0, 20.0, 50.0);
    let series: Vec<(&str, Vec<(f64, f64)>)> = outcome
        .runs
        .iter()
        .map(|run| {
            let recs = &run.history.records;
            let stride = (recs.len() / 2000).max(1);
            let mut pts: Vec<(f64, f64)> = recs
                .iter()
                .enumerate()
                .filter(|(i, _)| i % stride == 0 || *i + 1 == recs.len())
                .filter_map(|(_, r)| r.relative_error.map(|e| (r.elapsed_s, e)))
                .collect();
            pts.dedup();
            (run.method.name(), pts)
        })
        .collect();
    let t_max = series
        .iter()
        .flat_map(|(_, p)| p.iter().map(|q| q.0))
        .fold(0.0, f64::max)
        .max(1e-9);
    let e_max = series
        .iter()
        .flat_map(|(_, p)| p.iter().map(|q| q.1))
        .fold(0.0, f64::max)
        .max(1e-9)
        * 1.05;
    let px = |t: f64| left + (w - left - right) * t / t_max;
    let py = |e: f64| top + (h - top - bottom) * (1.0 - e / e_max);

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    s.push_str(&format!("<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"));
    s.push_str(&format!(
        "<line x1=\"{left}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n<line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{y0}\" stroke=\"black\"/>\n",
        y0 = h - bottom,
        x1 = w - right
    ));
    for k in 0..=4 {
        let t = t_max * k as f64 / 4.0;
        let e = e_max * k as f64 / 4.0;
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{t:.3}</text>\n",
            px(t),
            h - bottom + 18.0
        ));
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{e:.3}</text>\n",
            left - 6.0,
            py(e) + 4.0
        ));
    }
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">time (s)</text>\n",
        left + (w - left - right) / 2.0,
        h - 12.0
    ));
    s.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">relative error</text>\n",
        top + (h - top - bottom) / 2.0,
        top + (h - top - bottom) / 2.0
    ));
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = pts.iter().map(|&(t, e)| format!("{:.2},{:.2}", px(t), py(e))).collect();
        s.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            path.join(" ")
        ));
        let ly = top + 16.0 * (i as f64 + 1.0);
        s.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"2\"/>\n<text x=\"{:.1}\" y=\"{:.1}\">{name}</text>\n",
            w - right - 110.0,
            w - right - 85.0,
            w - right - 78.0,
            ly + 4.0
        ));
    }
    s.push_str("</svg>\n");
    s
}

/// Writes all report files for `outcome` under `dir`.
pub fn write_reports(outcome: &ExperimentOutcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.txt"), outcome.spec.to_config_text())?;
    for run in &outcome.runs {
        let sub = method_dir(dir, run);
        fs::create_dir_all(&sub)?;
        write_history(run, &sub.join("history.csv"))?;
        write_timing(run, &sub.join("timing.csv"))?;
        write_reconstruction(outcome, run, &sub.join("reconstruction.csv"))?;
        let summary = serde_json::to_string_pretty(&RunSummary::new(outcome, run))?;
        fs::write(sub.join("summary.json"), summary + "\n")?;
    }
    fs::write(dir.join("re_vs_time.svg"), re_vs_time_svg(outcome))?;
    Ok(())
}

pub fn method_dir(dir: &Path, run: &MethodRun) -> PathBuf {
    dir.join(run.method.name())
}

pub fn cell_dir(dir: &Path, cell: &SweepCell) -> PathBuf {
    dir.join(format!("beta_{}_noise_{}", cell.beta, cell.noise_level))
}

/// Writes every cell's reports into its own subdirectory plus a `sweep.csv`
/// table with one row per cell and method.
pub fn write_sweep(cells: &[SweepCell], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = create(&dir.join("sweep.csv"))?;
    writeln!(
        w,
        "beta,noise_level,method,n_delta,relative_error,delta_eff,elapsed_s,stop_reason"
    )?;
    for cell in cells {
        write_reports(&cell.outcome, &cell_dir(dir, cell))?;
        for run in &cell.outcome.runs {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                num(cell.beta),
                num(cell.noise_level),
                run.method,
                run.history.n_delta,
                opt_num(run.relative_error()),
                num(cell.outcome.delta_eff),
                num(run.history.elapsed_s),
                stop_label(&run.history.stop_reason)
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn stop_label(reason: &StopReason) -> &'static str {
    match reason {
        StopReason::Discrepancy => "discrepancy",
        StopReason::MaxIters => "max_iters",
        StopReason::Stagnation => "stagnation",
        StopReason::Failed(_) => "failed",
    }
}
