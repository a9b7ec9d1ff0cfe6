use std::path::Path;
use std::process::{Command, Output};

fn hpicp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hpicp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn small_run(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "run-1d",
        "--elements",
        "32",
        "--max-iters",
        "400",
        "--out",
        dir.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    hpicp(&args)
}

fn read(path: impl AsRef<Path>) -> Vec<u8> {
    std::fs::read(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

#[test]
fn selftest_passes_and_negative_control_fails() {
    let out = hpicp(&["selftest"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 7);

    let out = hpicp(&["selftest", "--flip-adjoint-sign"]);
    assert_eq!(code(&out), 4);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().any(|l| l.starts_with("FAIL adjoint")), "{text}");
}

#[test]
fn writes_all_report_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = small_run(dir.path(), &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for m in ["hpicp", "licp"] {
        for f in ["history.csv", "timing.csv", "reconstruction.csv", "summary.json"] {
            assert!(dir.path().join(m).join(f).is_file(), "{m}/{f}");
        }
    }
    let svg = String::from_utf8(read(dir.path().join("re_vs_time.svg"))).unwrap();
    assert!(svg.starts_with("<svg") && svg.matches("<polyline").count() == 2);

    let history = String::from_utf8(read(dir.path().join("hpicp/history.csv"))).unwrap();
    assert_eq!(history.lines().next(), Some("n,res_norm,relative_error"));
    assert_eq!(history.lines().count(), 402);
}

#[test]
fn identical_seed_gives_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    assert_eq!(code(&small_run(a.path(), &["--seed", "7"])), 0);
    assert_eq!(code(&small_run(b.path(), &["--seed", "7", "--parallel"])), 0);
    assert_eq!(code(&small_run(c.path(), &["--seed", "8"])), 0);
    for f in [
        "hpicp/history.csv",
        "hpicp/reconstruction.csv",
        "licp/history.csv",
        "licp/reconstruction.csv",
    ] {
        assert_eq!(read(a.path().join(f)), read(b.path().join(f)), "{f}");
        assert_ne!(read(a.path().join(f)), read(c.path().join(f)), "{f}");
    }
}

#[test]
fn emitted_config_reproduces_the_run() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(code(&small_run(a.path(), &["--beta", "5", "--method", "licp"])), 0);
    assert!(!a.path().join("hpicp").exists());
    let cfg = a.path().join("config.txt");
    let out = hpicp(&[
        "run-1d",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        b.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        read(a.path().join("licp/history.csv")),
        read(b.path().join("licp/history.csv"))
    );
}

/// Recomputes RE from reconstruction.csv with trapezoidal weights taken from
/// the node coordinates.
#[test]
fn summary_matches_emitted_reconstruction() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&small_run(dir.path(), &[])), 0);
    for m in ["hpicp", "licp"] {
        let summary: serde_json::Value =
            serde_json::from_slice(&read(dir.path().join(m).join("summary.json"))).unwrap();
        let n_delta = summary["n_delta"].as_u64().unwrap();
        assert!(n_delta <= summary["spec"]["max_iters"].as_u64().unwrap());
        let rows: Vec<Vec<f64>> = String::from_utf8(read(dir.path().join(m).join("reconstruction.csv")))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
            .collect();
        let n = rows.len();
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            let lo = if i == 0 { rows[i][0] } else { rows[i - 1][0] };
            let hi = if i + 1 == n { rows[i][0] } else { rows[i + 1][0] };
            let w = (hi - lo) / 2.0;
            num += w * (rows[i][2] - rows[i][3]).powi(2);
            den += w * rows[i][3].powi(2);
        }
        let re = (num / den).sqrt();
        let reported = summary["relative_error"].as_f64().unwrap();
        assert!((re - reported).abs() <= 1e-12 * reported, "{m}: {re} vs {reported}");

        let history = String::from_utf8(read(dir.path().join(m).join("history.csv"))).unwrap();
        let last: Vec<&str> = history.lines().last().unwrap().split(',').collect();
        assert_eq!(last[0].parse::<u64>().unwrap(), n_delta);
        assert_eq!(last[2].parse::<f64>().unwrap(), reported);
    }
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&small_run(dir.path(), &["--tau", "0.5"])), 2);
    assert_eq!(code(&small_run(dir.path(), &["--set", "no_such_key=1"])), 2);
    assert_eq!(code(&hpicp(&["run-1d", "--config", "/nonexistent/spec.txt"])), 2);
    assert_eq!(code(&hpicp(&["run-2d", "--elements", "100"])), 2);
    assert_eq!(code(&hpicp(&["run-1d", "--method", "newton"])), 2);

    let cfg = dir.path().join("bad.txt");
    std::fs::write(&cfg, "beta = 1\nthis line has no equals sign\n").unwrap();
    let out = hpicp(&["run-1d", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    std::fs::write(&cfg, "problem = pot2d\n").unwrap();
    assert_eq!(code(&hpicp(&["run-1d", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn solver_failure_exits_3_and_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let out = hpicp(&[
        "run-2d",
        "--elements",
        "128",
        "--penalty",
        "l2tv",
        "--tv-inner-max-iters",
        "1",
        "--tv-inner-tol",
        "1e-15",
        "--method",
        "hpicp",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
    let summary: serde_json::Value = serde_json::from_slice(&read(dir.path().join("hpicp/summary.json"))).unwrap();
    assert!(summary["stop_reason"]["failed"].as_str().unwrap().contains("ROF"));
}

#[test]
fn sweep_writes_one_cell_per_pair() {
    let dir = tempfile::tempdir().unwrap();
    let out = hpicp(&[
        "sweep",
        "--elements",
        "32",
        "--max-iters",
        "50",
        "--method",
        "hpicp",
        "--sweep-betas",
        "1,20",
        "--sweep-noise-levels",
        "0.01,0.001",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8(read(dir.path().join("sweep.csv"))).unwrap();
    assert_eq!(table.lines().count(), 5);
    assert!(dir.path().join("beta_20_noise_0.001/hpicp/history.csv").is_file());
}
