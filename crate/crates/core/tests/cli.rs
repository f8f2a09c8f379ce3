use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use liouville::grid::LiouvilleState;
use liouville::survival::DecayCurve;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liouville")).args(args).output().expect("spawn liouville")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn curve(path: &Path) -> DecayCurve {
    DecayCurve::read_csv(std::io::BufReader::new(fs::File::open(path).unwrap())).unwrap()
}

fn state(path: &Path) -> (LiouvilleState, std::collections::BTreeMap<String, String>) {
    LiouvilleState::read_csv(std::io::BufReader::new(fs::File::open(path).unwrap())).unwrap()
}

fn small_config(dir: &Path) -> String {
    let p = dir.join("small.conf");
    fs::write(&p, "# reduced grid\nn_nu = 1024\nn_e = 48\nt_max = 100\nt_steps = 200\n").unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn default_curve_starts_at_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["curve", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let c = curve(&dir.path().join("curve.csv"));
    assert_eq!(c.len(), 2000);
    assert!((c.p[0] - 1.0).abs() <= 1e-6);
    assert!(c.meta.gamma.is_some() && c.meta.omega_tilde.is_some());
    assert!(dir.path().join("bound_report.csv").exists());
}

#[test]
fn closed_and_fft_curves_agree() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("fft");
    let b = dir.path().join("closed");
    assert_eq!(code(&run(&["curve", "--method", "fft", "--out", a.to_str().unwrap()])), 0);
    assert_eq!(code(&run(&["curve", "--method", "closed", "--out", b.to_str().unwrap()])), 0);
    let (ca, cb) = (curve(&a.join("curve.csv")), curve(&b.join("curve.csv")));
    assert_eq!(ca.t, cb.t);
    let worst = ca
        .p
        .iter()
        .zip(&cb.p)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    assert!(worst <= 5e-2, "max relative gap {worst:.3e}");
}

#[test]
fn negative_gamma_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    fs::write(&cfg, "gamma = -0.1\n").unwrap();
    let o = run(&["curve", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("gamma"));
    assert!(!dir.path().join("curve.csv").exists());
}

#[test]
fn project_at_zero_lands_in_hardy_space() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let o = run(&["project", "--s", "0", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (p, meta) = state(&dir.path().join("projected.csv"));
    assert_eq!(meta.get("kind").map(String::as_str), Some("projection"));
    assert!(liouville::hardy::state_residual(&p).unwrap() <= 1e-3);
}

#[test]
fn project_at_tau_max_is_identity_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let o = run(&["project", "--s", "tau_max", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (input, meta) = state(&dir.path().join("state.csv"));
    let (proj, _) = state(&dir.path().join("projected.csv"));
    let gap = input.sub(&proj).unwrap().norm();
    assert!(gap <= 1e-12 * input.norm(), "gap {gap:e}");
    let stored: f64 = meta["norm2"].parse().unwrap();
    assert!((input.norm2() - stored).abs() <= 1e-12 * stored);
}

#[test]
fn project_out_of_range_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let o = run(&["project", "--s", "1e9", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(!dir.path().join("projected.csv").exists());
}

#[test]
fn verify_passes_and_detects_injected_fault() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["verify", "--out", out]);
    let report = fs::read_to_string(dir.path().join("verify_report.txt")).unwrap();
    assert_eq!(code(&o), 0, "{report}");
    assert!(report.trim_end().ends_with("ALL PASS"));
    let o = run(&["verify", "--inject-fault", "monotonicity", "--out", out]);
    assert_eq!(code(&o), 1);
    let report = fs::read_to_string(dir.path().join("verify_report.txt")).unwrap();
    assert!(report.contains("FAIL monotonicity"), "{report}");
}

fn sweep(dir: &Path, list: &str) -> Output {
    run(&["sweep", "--sweep", list, "--out", dir.to_str().unwrap()])
}

#[test]
fn gamma_sweep_writes_curves_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = sweep(dir.path(), "gamma=0.05,0.1,0.2");
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for g in ["0.05", "0.1", "0.2"] {
        assert!(dir.path().join(format!("gamma={g}")).join("curve.csv").exists());
    }
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let slope_col = header.iter().position(|h| *h == "algebraic_slope").unwrap();
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        let slope: f64 = r[slope_col].parse().unwrap();
        assert!(slope.is_finite() && slope < 0.0);
    }
}

#[test]
fn empty_sweep_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&sweep(dir.path(), "gamma=")), 2);
    assert!(!dir.path().join("summary.csv").exists());
}

#[test]
fn sweep_order_does_not_change_curves() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(code(&sweep(a.path(), "lambda=0.08,0.1")), 0);
    assert_eq!(code(&sweep(b.path(), "lambda=0.1,0.08")), 0);
    for v in ["0.08", "0.1"] {
        let x = fs::read(a.path().join(format!("lambda={v}")).join("curve.csv")).unwrap();
        let y = fs::read(b.path().join(format!("lambda={v}")).join("curve.csv")).unwrap();
        assert_eq!(x, y, "lambda={v}");
    }
}
