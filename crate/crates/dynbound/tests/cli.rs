use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dynbound::svg::plotted_data;

fn systems() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("systems")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynbound")).args(args).output().expect("spawn dynbound")
}

fn sys(name: &str) -> String {
    systems().join(name).display().to_string()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn missing_system_file_exits_1() {
    let o = run(&["simulate", "--system", "/definitely/not/here.sys", "--x0", "1", "--t1", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot read"));
}

#[test]
fn bad_arguments_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let lorenz = sys("lorenz.sys");
    for args in [
        vec!["simulate", "--system", &lorenz, "--x0", "1,1", "--t1", "1", "--out", out],
        vec!["simulate", "--system", &lorenz, "--x0", "1,1,nan", "--t1", "1", "--out", out],
        vec!["section", "--system", &lorenz, "--plane", "0,0,27/0,0,0/both", "--out", out],
        vec!["bounds-check", "--system", &lorenz, "--alpha", "1", "--random", "2", "--out", out],
        vec!["no-such-command"],
    ] {
        assert_eq!(run(&args).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn decay_endpoint_and_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("decay.sys");
    std::fs::write(&f, "dx/dt = -x\n").unwrap();
    let o = run(&[
        "simulate",
        "--system",
        f.to_str().unwrap(),
        "--x0",
        "1",
        "--t1",
        "1",
        "--int-tol",
        "1e-12",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,x"));
    let last: Vec<f64> = lines.last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], 1.0);
    assert!((last[1] - (-1.0f64).exp()).abs() < 1e-8);
}

#[test]
fn blow_up_writes_partial_trajectory_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("blowup.sys");
    std::fs::write(&f, "dx/dt = x^2\n").unwrap();
    let o = run(&[
        "simulate",
        "--system",
        f.to_str().unwrap(),
        "--x0",
        "1",
        "--t1",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let t_last: f64 = csv.lines().last().unwrap().split(',').next().unwrap().parse().unwrap();
    assert!(t_last > 0.9 && t_last < 1.0, "{t_last}");
}

#[test]
fn stdout_mode_prints_only_machine_output() {
    let o = run(&[
        "lyapunov",
        "--system",
        &sys("stuart-landau.sys"),
        "--x0",
        "1,0,0.5",
        "--transient",
        "10",
        "--time",
        "50",
        "--stdout",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let l: Vec<f64> = v["exponents"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    // cycle: 0 along the flow, -1 for z, -2 radially
    for (got, want) in l.iter().zip([0.0, -1.0, -2.0]) {
        assert!((got - want).abs() < 0.05, "{l:?}");
    }
    assert!(!o.stderr.is_empty());
}

#[test]
fn lorenz_projection_stays_on_attractor() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "simulate",
        "--system",
        &sys("lorenz.sys"),
        "--x0",
        "1,1,1",
        "--t1",
        "50",
        "--project",
        "x,z",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let svg = std::fs::read_to_string(dir.path().join("projection.svg")).unwrap();
    assert!(svg.contains(r#"width="800" height="600""#));
    let pts = plotted_data(&svg);
    assert!(pts.len() > 1000);
    for (x, z) in pts {
        assert!(x.abs() <= 25.0 && (0.0..=50.0).contains(&z), "({x}, {z})");
    }
}

#[test]
fn bounds_check_on_equilibrium_system() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "bounds-check",
        "--system",
        &sys("equilibrium.sys"),
        "--x0",
        "1,-2,0.5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&dir.path().join("bounds.json"));
    assert_eq!(v["uncertified"], serde_json::json!([1, 2]));
    let b = &v["runs"][0]["bounds"][0];
    assert_eq!(b["component"], 3);
    assert_eq!(b["alpha"], 0.0);
    assert_eq!(b["forward_holds"], true);
    assert_eq!(b["backward_holds"], true);
    assert_eq!(b["naive_backward_violated"], true);
}

#[test]
fn false_user_bound_exits_3() {
    // dz/dt = x^2 is not bounded below by 1
    let o = run(&[
        "bounds-check",
        "--system",
        &sys("equilibrium.sys"),
        "--x0",
        "0.1,0,0",
        "--component",
        "3",
        "--alpha",
        "1",
        "--t-back",
        "5",
        "--t-fwd",
        "5",
        "--stdout",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["runs"][0]["bounds"][0]["source"], "user-asserted");
    assert_eq!(v["runs"][0]["bounds"][0]["forward_holds"], false);
}

#[test]
fn refute_cubic_escape() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("cubic.sys");
    std::fs::write(&f, "dx/dt = 1\ndy/dt = 0\ndz/dt = x^2\n").unwrap();
    let o = run(&["refute", "--system", f.to_str().unwrap(), "--x0", "0,0,5", "--horizon", "100", "--stdout"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["bounded"], false);
    assert_eq!(v["verdict"], "orbit escaped backward — no counterexample from this seed");
    assert!(v["escape"]["kind"].is_string());
}

#[test]
fn section_from_point_on_plane() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "section",
        "--system",
        &sys("stuart-landau.sys"),
        "--plane",
        "0,0,0/0,1,0/positive",
        "--x0",
        "1,0,0",
        "--transient",
        "0",
        "--iterates",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let mut r = csv::Reader::from_path(dir.path().join("section.csv")).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["iterate", "u", "v", "t"]);
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    for (i, row) in rows.iter().enumerate() {
        let t: f64 = row[3].parse().unwrap();
        assert!((t - i as f64 * std::f64::consts::TAU).abs() < 1e-6, "{row:?}");
    }
    assert!(dir.path().join("section.svg").exists());
}

#[test]
fn placeholder_system_parses_to_a_rest_flow() {
    let o = run(&["simulate", "--system", &sys("fig1-placeholder.sys"), "--x0", "1,2,3", "--t1", "1", "--stdout"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = String::from_utf8(o.stdout).unwrap();
    let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last, vec![1.0, 1.0, 2.0, 3.0]);
}
