use std::path::Path;
use std::process::Command;

use lyapstep::{make_problem, ProblemSpec};

fn lyapstep(args: &[&str], out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_lyapstep"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
        .status
        .code()
        .expect("exit code")
}

fn read_csv(path: &Path) -> (String, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    (header, lines.map(|l| l.split(',').map(str::to_string).collect()).collect())
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(lyapstep(&["--help"], dir.path()), 0);
    assert_eq!(lyapstep(&["--version"], dir.path()), 0);
    assert_eq!(lyapstep(&["sweep", "--help"], dir.path()), 0);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["integrate", "--problem", "pendulum"],
        vec!["integrate", "--method", "dg,rk4"],
        vec!["integrate", "--method", "dg-e", "--problem", "duffing"],
        vec!["integrate", "--problem", "linear", "--y0", "1,2"],
        vec!["integrate", "--problem", "linear", "--h", "0.1", "--t-end", "0.01"],
        vec!["order", "--problem", "duffing", "--h", "1.5e-8,1e-4", "--t-end", "1e-3"],
        vec!["phase", "--problem", "logistic-v2"],
    ] {
        assert_eq!(lyapstep(&args, dir.path()), 1, "{args:?}");
    }
}

#[test]
fn numerical_failure_exits_two_and_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    let code = lyapstep(&["integrate", "--problem", "logistic-v1", "--method", "euler", "--h", "7e-4"], dir.path());
    assert_eq!(code, 2);
    let (_, rows) = read_csv(&dir.path().join("traj.csv"));
    assert_eq!(rows.len(), 5);
}

#[test]
fn single_step_run_has_two_rows() {
    let dir = tempfile::tempdir().unwrap();
    let code = lyapstep(
        &["integrate", "--problem", "linear", "--a", "1", "--y0", "5", "--method", "dg", "--h", "1", "--t-end", "1"],
        dir.path(),
    );
    assert_eq!(code, 0);
    let (header, rows) = read_csv(&dir.path().join("traj.csv"));
    assert_eq!(header, "t,y1,V,delta_V,newton_iters,status");
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][3..], ["", "", ""]);
    assert_eq!(rows[1][5], "converged");
    let y1: f64 = rows[1][1].parse().unwrap();
    assert!((y1 - 5.0 / 3.0).abs() < 1e-15);
}

#[test]
fn csv_potential_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let code = lyapstep(&["integrate", "--problem", "duffing", "--method", "ros2", "--h", "1e-3", "--t-end", "0.5"], dir.path());
    assert_eq!(code, 0);
    let sys = make_problem(&ProblemSpec::duffing_default());
    let (header, rows) = read_csv(&dir.path().join("traj.csv"));
    assert_eq!(header, "t,y1,y2,V,delta_V,newton_iters,status");
    assert_eq!(rows.len(), 501);
    for r in &rows {
        let y: Vec<f64> = r[1..3].iter().map(|s| s.parse().unwrap()).collect();
        let v: f64 = r[3].parse().unwrap();
        assert!((sys.potential(&y) - v).abs() <= 1e-12 * (1.0 + v.abs()));
        assert_eq!(r[4..], ["", "", ""]);
    }
}

#[test]
fn order_self_test_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let code = lyapstep(
        &["order", "--problem", "linear", "--methods", "euler,dg", "--h", "1e-5,2e-5,5e-5,1e-4,2e-4", "--self-test", "--plot"],
        dir.path(),
    );
    assert_eq!(code, 0);
    let (header, rows) = read_csv(&dir.path().join("order_fit.csv"));
    assert_eq!(header, "method,slope,intercept,residual");
    let slope = |name: &str| -> f64 { rows.iter().find(|r| r[0] == name).unwrap()[1].parse().unwrap() };
    assert!((slope("synthetic-p1") - 1.0).abs() < 1e-12);
    assert!((slope("synthetic-p2") - 2.0).abs() < 1e-12);
    assert!((slope("euler") - 1.0).abs() < 0.1);
    assert!((slope("dg") - 2.0).abs() < 0.1);
    assert!(dir.path().join("order.svg").exists());
}

#[test]
fn sweep_writes_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let code = lyapstep(
        &["sweep", "--problem", "logistic-v1", "--methods", "euler,dg-i", "--h", "1e-4,7e-4", "--repeats", "1", "--plot"],
        dir.path(),
    );
    assert_eq!(code, 0);
    let (_, rows) = read_csv(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().any(|r| r[0] == "euler" && r[4].starts_with("blowup")));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["problem"], "logistic-v1");
    assert!(dir.path().join("cost.svg").exists());
}
