use hpicp_core::experiment::{report, run_experiment, write_reports, ExperimentSpec};
use hpicp_core::{Method, PenaltyKind, StopReason};

fn small_spec() -> ExperimentSpec {
    let mut spec = ExperimentSpec::default_1d();
    spec.elements = 64;
    spec.max_iters = 500;
    spec
}

#[test]
fn quadratic_penalty_residual_decays() {
    let mut spec = small_spec();
    spec.penalty.kind = PenaltyKind::L2;
    spec.noise_level = 0.0;
    let outcome = run_experiment(&spec).unwrap();
    let mut last = Vec::new();
    for run in &outcome.runs {
        let recs = &run.history.records;
        assert_eq!(run.history.stop_reason, StopReason::MaxIters);
        assert_eq!(recs.len(), 501);
        let res0 = recs[0].res_norm;
        let res = recs[500].res_norm;
        assert!(res <= 0.05 * res0, "{}: {res} vs {res0}", run.method);
        last.push(res);
    }
    // two Landweber-like corrections per step beat one
    assert!(last[0] < last[1]);
}

#[test]
fn parallel_matches_sequential() {
    let spec = small_spec();
    let seq = run_experiment(&spec).unwrap();
    let par = run_experiment(&ExperimentSpec { parallel: true, ..spec }).unwrap();
    for (a, b) in seq.runs.iter().zip(&par.runs) {
        assert_eq!(a.method, b.method);
        assert_eq!(a.history.reconstruction.values(), b.history.reconstruction.values());
        let res = |h: &hpicp_core::RunHistory| h.records.iter().map(|r| r.res_norm).collect::<Vec<_>>();
        assert_eq!(res(&a.history), res(&b.history));
    }
}

#[test]
fn reports_round_trip() {
    let mut spec = small_spec();
    spec.methods = vec![Method::Licp];
    let outcome = run_experiment(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_reports(&outcome, dir.path()).unwrap();

    let text = std::fs::read_to_string(dir.path().join("config.txt")).unwrap();
    let mut back = ExperimentSpec::default_2d();
    back.apply_config_text(&text).unwrap();
    assert_eq!(back, spec);

    let run = &outcome.runs[0];
    let history = std::fs::read_to_string(dir.path().join("licp/history.csv")).unwrap();
    for (line, rec) in history.lines().skip(1).zip(&run.history.records) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[0].parse::<usize>().unwrap(), rec.n);
        assert_eq!(cols[1].parse::<f64>().unwrap(), rec.res_norm);
        assert_eq!(cols[2].parse::<f64>().ok(), rec.relative_error);
    }
    let recon = std::fs::read_to_string(dir.path().join("licp/reconstruction.csv")).unwrap();
    let c: Vec<f64> = recon
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(c, run.history.reconstruction.values());

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("licp/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["n_delta"].as_u64().unwrap() as usize, run.history.n_delta);
    assert_eq!(summary["stop_reason"], report::stop_label(&run.history.stop_reason));
    assert_eq!(summary["delta_eff"].as_f64().unwrap(), outcome.delta_eff);
}
