use std::fs;
use std::path::Path;

use fractrans::cli::{main_with, Outcome};

const NO_ENV: [(&str, &str); 0] = [];

fn run(out: &Path, extra: &[&str], env: &[(&str, &str)]) -> i32 {
    let mut args = vec!["fractrans".to_string(), "--out".into(), out.display().to_string()];
    args.extend(extra.iter().map(|s| s.to_string()));
    main_with(args, env.iter().copied())
}

#[test]
fn linear_preset_validates_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(
        dir.path(),
        &["--set", "preset=linear", "--set", "validate_ns=8,16", "--set", "validate_paths=3", "validate"],
        &NO_ENV,
    );
    assert_eq!(code, 0);
    let csv = fs::read_to_string(dir.path().join("reports.csv")).unwrap();
    assert!(csv.lines().count() > 10);
    assert!(csv.lines().skip(1).all(|l| l.contains("true")), "{csv}");
}

#[test]
fn gen_fbm_is_seed_deterministic() {
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["--set", "grid_points=64", "gen-fbm"];
    assert_eq!(run(a.path(), &args, &NO_ENV), 0);
    assert_eq!(run(b.path(), &args, &[("FRACTRANS_SEED", "1")]), 0);
    assert_eq!(run(c.path(), &args, &[("FRACTRANS_SEED", "2")]), 0);
    for name in ["driver_transport.csv", "driver_exact.csv"] {
        let read = |d: &tempfile::TempDir| fs::read_to_string(d.path().join(name)).unwrap();
        assert_eq!(read(&a), read(&b));
        assert_ne!(read(&a), read(&c));
    }
}

#[test]
fn short_sweep_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(dir.path(), &["--set", "n_sweep=8,16", "--set", "replicas=2", "converge"], &NO_ENV);
    assert_eq!(code, 2);
    assert!(!dir.path().join("rate_table.csv").exists());
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["--set", "hurts=0.7", "gen-fbm"], &NO_ENV), 2);
    assert_eq!(run(dir.path(), &["gen-fbm"], &[("FRACTRANS_HURTS", "0.7")]), 2);
    assert_eq!(run(dir.path(), &["--set", "hurst=1.5", "gen-fbm"], &NO_ENV), 2);
    let cfg = dir.path().join("bad.conf");
    fs::write(&cfg, "# comment\nhurst = 0.7\nbogus = 1\n").unwrap();
    assert_eq!(run(dir.path(), &["--config", cfg.to_str().unwrap(), "gen-fbm"], &NO_ENV), 2);
    assert!(fs::read_dir(dir.path()).unwrap().all(|e| e.unwrap().file_name() == "bad.conf"));
}

#[test]
fn config_file_layers_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "driver = exact\ngrid_points = 16\n").unwrap();
    let out = dir.path().join("o");
    let code = run(&out, &["--config", cfg.to_str().unwrap(), "--set", "grid_points=8", "gen-fbm"], &NO_ENV);
    assert_eq!(code, 0);
    assert!(!out.join("driver_transport.csv").exists());
    let csv = fs::read_to_string(out.join("driver_exact.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 9);
}

#[test]
fn failed_write_leaves_nothing_behind() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("blocker")).unwrap();
    let outcome = Outcome {
        files: vec![("first.csv".into(), "a\n".into()), ("blocker".into(), "b\n".into())],
        ..Outcome::default()
    };
    assert!(outcome.write_to(dir.path()).is_err());
    assert!(!dir.path().join("first.csv").exists());
}

#[test]
fn converge_ignores_thread_count() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = |k: &'static str| {
        vec!["--threads", k, "--set", "n_sweep=8,12,16", "--set", "replicas=3", "--set", "cov_replicas=20", "converge"]
    };
    let ca = run(a.path(), &args("1"), &NO_ENV);
    let cb = run(b.path(), &args("3"), &NO_ENV);
    assert_eq!(ca, cb);
    for name in ["rate_table.csv", "rate_table_y.csv", "reports.csv", "rate_plot.svg"] {
        let read = |d: &tempfile::TempDir| fs::read(d.path().join(name)).unwrap();
        assert_eq!(read(&a), read(&b), "{name}");
    }
}
