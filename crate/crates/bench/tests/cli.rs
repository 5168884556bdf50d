use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_contact-bench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_small(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "run",
        "--problem",
        "horizontal_crack",
        "--mesh",
        "11x11",
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    bench(&args)
}

#[test]
fn successful_run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_small(dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("s,uN,uT,pN,tau,status"));
    assert_eq!(lines.count(), 22);
    let log = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert!(log.starts_with("step,iter,residual_norm\n0,0,"));
    let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("converged=true"));
    assert!(summary.contains("max_uN="));
}

#[test]
fn outputs_are_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let out = run_small(d.path(), &["--steps", "3"]);
        assert_eq!(out.status.code(), Some(0));
    }
    for name in ["profile.csv", "profile_step_002.csv", "convergence.csv", "summary.txt", "config.txt"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
}

#[test]
fn config_errors_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_small(dir.path(), &["--method", "lagrange"]).status.code(), Some(3));
    assert_eq!(bench(&["run", "--problem", "nope"]).status.code(), Some(3));
    assert_eq!(bench(&["frobnicate"]).status.code(), Some(3));

    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "mu = lots\n").unwrap();
    assert_eq!(run_small(dir.path(), &["--config", cfg.to_str().unwrap()]).status.code(), Some(3));
    let missing = dir.path().join("missing.cfg");
    assert_eq!(run_small(dir.path(), &["--config", missing.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn unwritable_output_exits_with_4() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("occupied");
    fs::write(&file, "not a directory").unwrap();
    assert_eq!(run_small(&file, &[]).status.code(), Some(4));
}

#[test]
fn non_convergence_exits_with_2_and_keeps_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("short.cfg");
    fs::write(&cfg, "# one Newton iteration cannot resolve the contact\nmax_iterations = 1\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = run_small(&out_dir, &["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let summary = fs::read_to_string(out_dir.join("summary.txt")).unwrap();
    assert!(summary.contains("converged=false"));
    assert!(summary.contains("stop_reasons=max_iterations"));
    assert!(out_dir.join("convergence.csv").exists());
}

#[test]
fn config_file_overrides_registry() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("thick.cfg");
    fs::write(&cfg, "dhat = 1e-3\nmesh = 11x11\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = bench(&[
        "run",
        "--problem",
        "horizontal_crack",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let summary = fs::read_to_string(out_dir.join("summary.txt")).unwrap();
    assert!(summary.contains("d_hat=0.001\n"));
    assert!(summary.contains("mesh=11x11\n"));
}

#[test]
fn dhat_study_reports_both_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench(&[
        "study",
        "--kind",
        "dhat",
        "--dhats",
        "1e-4,1e-3",
        "--problem",
        "horizontal_crack",
        "--mesh",
        "11x11",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("dhat_study.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(dir.path().join("run_1/profile.csv").exists());
    // a mesh study needs two meshes
    let out = bench(&[
        "study",
        "--kind",
        "mesh",
        "--meshes",
        "11x11",
        "--problem",
        "horizontal_crack",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}
