use std::path::Path;
use std::process::{Command, Output};

use erasure_core::harness::{read_csv, Report, OUT_DIR_ENV, REPORT_FILE, TIMINGS_FILE};

fn erasure(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_erasure"))
        .args(args)
        .current_dir(cwd)
        .env_remove(OUT_DIR_ENV)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    dir.join(name).to_string_lossy().into_owned()
}

const SUITE_5_7: &str = "command = \"suite\"\n[suite]\ncriteria = [5, 7]\n";

#[test]
fn passing_run_exits_zero_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SUITE_5_7);
    let out = dir.path().join("o");
    let res = erasure(&["suite", "--config", &cfg, "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(String::from_utf8_lossy(&res.stdout).contains("2 runs, 2 passed"));
    let report = Report::read(&out).unwrap();
    assert_eq!(report.runs.len(), 2);
    assert!(out.join(TIMINGS_FILE).exists() && out.join("tables.json").exists());
    let (header, rows) = read_csv(&out.join("checks.csv")).unwrap();
    assert_eq!(header, ["run_id", "check", "lhs", "rhs", "ok"]);
    assert_eq!(rows.len(), report.summary.checks);
}

#[test]
fn failing_run_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", "command = \"suite\"\n[suite]\ncriteria = [1]\n");
    let res = erasure(&["suite", "--config", &cfg, "--cap-dim", "2", "--out", "o"], dir.path());
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("FAIL c01-convex-split"));
    assert!(!Report::read(&dir.path().join("o")).unwrap().passed());
}

#[test]
fn bad_configuration_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "command = \"entropy\"\n[state]\npreset = \"plus\"\n[params]\neps = 1.5\n");
    let res = erasure(&["entropy", "--config", &bad], dir.path());
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("outside [0, 1)") && err.contains("[sigma] or a [free_set]"), "{err}");

    let res = erasure(&["protocol"], dir.path());
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("needs --config"));

    let suite = write(dir.path(), "s.toml", SUITE_5_7);
    let res = erasure(&["rate", "--config", &suite], dir.path());
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("is for command `suite`"));

    let res = erasure(&["teleport"], dir.path());
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn output_directory_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", "command = \"suite\"\noutput = \"from-config\"\n[suite]\ncriteria = [5]\n");
    let res = Command::new(env!("CARGO_BIN_EXE_erasure"))
        .args(["suite", "--config", &cfg])
        .current_dir(dir.path())
        .env(OUT_DIR_ENV, dir.path().join("from-env"))
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(0));
    assert!(dir.path().join("from-config").join(REPORT_FILE).exists());

    let plain = write(dir.path(), "p.toml", "command = \"suite\"\n[suite]\ncriteria = [5]\n");
    let res = Command::new(env!("CARGO_BIN_EXE_erasure"))
        .args(["suite", "--config", &plain])
        .current_dir(dir.path())
        .env(OUT_DIR_ENV, dir.path().join("from-env"))
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(0));
    assert!(dir.path().join("from-env").join(REPORT_FILE).exists());

    let res = erasure(&["suite", "--config", &plain], dir.path());
    assert_eq!(res.status.code(), Some(0));
    assert!(dir.path().join("erasure-out").join(REPORT_FILE).exists());
}

#[test]
fn seed_flag_overrides_config_and_reruns_match() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "p.toml",
        "command = \"protocol\"\nseed = 1\n[free_set]\nfamily = \"coherence\"\n[state]\nrandom = \"pure\"\nlayout = \"M:2\"\n",
    );
    for name in ["a", "b"] {
        let res = erasure(&["protocol", "--config", &cfg, "--seed", "42", "--out", name], dir.path());
        assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    }
    let a = std::fs::read(dir.path().join("a").join(REPORT_FILE)).unwrap();
    let b = std::fs::read(dir.path().join("b").join(REPORT_FILE)).unwrap();
    assert_eq!(a, b);
    assert_eq!(Report::read(&dir.path().join("a")).unwrap().header.config["seed"], 42);
}
