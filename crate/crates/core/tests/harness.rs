use std::collections::BTreeMap;

use erasure_core::harness::*;
use erasure_core::Error;

const PLUS: &str = "layout M:2\n0.5,0 0.5,0\n0.5,0 0.5,0\n";
const MIXED: &str = "layout M:2\n0.5,0 0,0\n0,0 0.5,0\n";

fn entropy_config(eps: &str) -> String {
    format!(
        "command = \"entropy\"\n\n[state]\ninline = \"\"\"\n{PLUS}\"\"\"\n\n[sigma]\ninline = \"\"\"\n{MIXED}\"\"\"\n\n[params]\neps = {eps}\n"
    )
}

fn config_errors(text: &str) -> Vec<String> {
    match parse_config(text) {
        Err(Error::InvalidConfig(list)) => list,
        other => panic!("expected a configuration error, got {other:?}"),
    }
}

#[test]
fn minimal_entropy_config_is_valid() {
    let cfg = parse_config(&entropy_config("0.0")).unwrap();
    assert_eq!(cfg.command, CommandKind::Entropy);
    assert_eq!(cfg.seed, DEFAULT_SEED);
    let report = run_command(&cfg).unwrap();
    assert!(report.passed());
    let table = &report.tables[0];
    let dmax_row = table.rows.iter().find(|r| r[0] == Cell::from("dmax")).unwrap();
    match dmax_row[1] {
        Cell::Num(x) => assert!((x - 1.0).abs() < 1e-9, "dmax {x}"),
        ref c => panic!("{c:?}"),
    }
}

#[test]
fn eps_out_of_range_is_rejected() {
    let errs = config_errors(&entropy_config("1.5"));
    assert!(errs.iter().any(|e| e.contains("params.eps = 1.5 is outside [0, 1)")), "{errs:?}");
}

#[test]
fn file_layout_mismatch_names_both_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let four = "layout A:2 B:2\n0.25,0 0,0 0,0 0,0\n0,0 0.25,0 0,0 0,0\n0,0 0,0 0.25,0 0,0\n0,0 0,0 0,0 0.25,0\n";
    std::fs::write(dir.path().join("rho.txt"), four).unwrap();
    let text =
        "command = \"protocol\"\n[free_set]\nfamily = \"uniformity\"\n[state]\nfile = \"rho.txt\"\nlayout = \"M:2\"\n";
    let err = parse_config_at(text, dir.path()).unwrap_err().to_string();
    assert!(err.contains("dimension 2") && err.contains("4x4"), "{err}");

    // the same file with a matching layout is fine
    let ok = text.replace("M:2", "X:2 Y:2");
    parse_config_at(&ok, dir.path()).unwrap();
}

#[test]
fn unknown_keys_and_missing_fields_are_reported_together() {
    let errs = config_errors("command = \"block\"\ncolour = 3\n[params]\nepsilon = 0.1\n[state]\npreset = \"plus\"\n");
    assert!(errs.iter().any(|e| e.contains("colour")), "{errs:?}");
    assert!(errs.iter().any(|e| e.contains("epsilon")), "{errs:?}");
    let errs = config_errors("seed = 1\n");
    assert!(errs.iter().any(|e| e.contains("command")), "{errs:?}");
    let errs = config_errors("command = \"block\"\n[free_set]\nfamily = \"coherence\"\n[state]\npreset = \"plus\"\n");
    assert!(errs.iter().any(|e| e.contains("params.m")) && errs.iter().any(|e| e.contains("params.gamma")), "{errs:?}");
    let errs =
        config_errors("command = \"protocol\"\n[free_set]\nfamily = \"coherence\"\n[state]\npreset = \"nope\"\n");
    assert!(errs.iter().any(|e| e.contains("nope")), "{errs:?}");
}

#[test]
fn config_survives_its_own_serialization() {
    let cfg = parse_config(&entropy_config("0.1")).unwrap();
    let again = parse_config(&cfg.to_toml()).unwrap();
    assert_eq!(cfg.params, again.params);
    assert_eq!(cfg.state, again.state);
}

#[test]
fn convex_split_of_a_state_with_itself_has_zero_lhs() {
    let text = format!(
        "command = \"convex-split\"\n[state]\ninline = \"\"\"\n{MIXED}\"\"\"\n[sigma]\ninline = \"\"\"\n{MIXED}\"\"\"\n[params]\nn_list = [2, 4, 8]\neps_list = [0.0, 0.05]\n"
    );
    let report = run_command(&parse_config(&text).unwrap()).unwrap();
    assert!(report.passed());
    assert_eq!(report.exit_code(), 0);
    let table = report.tables.iter().find(|t| t.name == "convex_split").unwrap();
    assert_eq!(table.rows.len(), 6);
    let lhs = table.columns.iter().position(|c| c == "lhs").unwrap();
    for row in &table.rows {
        match row[lhs] {
            Cell::Num(x) => assert!(x.abs() < 1e-12, "lhs {x}"),
            ref c => panic!("lhs cell {c:?}"),
        }
    }
}

#[test]
fn rate_under_uniformity_is_flat_for_a_pure_qubit() {
    let text =
        "command = \"rate\"\n[free_set]\nfamily = \"uniformity\"\n[state]\npreset = \"zero\"\n[params]\nn_max = 6\n";
    let report = run_command(&parse_config(text).unwrap()).unwrap();
    assert!(report.passed());
    let rate = report.tables.iter().find(|t| t.name == "rate").unwrap();
    assert_eq!(rate.columns, ["n", "achievable", "converse", "E_over_n"]);
    assert_eq!(rate.rows.len(), 6);
    for (i, row) in rate.rows.iter().enumerate() {
        assert_eq!(row[0], Cell::Int(i as i64 + 1));
        match row[3] {
            Cell::Num(x) => assert!((x - 1.0).abs() < 1e-9, "E/n = {x}"),
            ref c => panic!("{c:?}"),
        }
    }
}

#[test]
fn empty_report_writes_header_only_tables() {
    let cfg = ExperimentConfig::new(CommandKind::Suite);
    let report = Report::new(&cfg, Vec::new(), Vec::new(), BTreeMap::new());
    assert!(report.passed());
    let dir = tempfile::tempdir().unwrap();
    emit_tables(&report, dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("checks.csv")).unwrap();
    assert_eq!(text, "run_id,check,lhs,rhs,ok\n");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("tables.json")).unwrap()).unwrap();
    assert_eq!(manifest["schema_version"], SCHEMA_VERSION);
}

#[test]
fn csv_round_trip_reproduces_values() {
    let mut t = Table::new("values", &["n", "x", "label", "ok"]);
    let xs = [1.0 / 3.0, -2.5e-9, 6.02214076e23, 0.0, std::f64::consts::PI, f64::INFINITY];
    for (i, &x) in xs.iter().enumerate() {
        t.push(vec![Cell::Int(i as i64), x.into(), format!("row, {i}").into(), (i % 2 == 0).into()]);
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join(t.file_name());
    write_csv(&t, &path).unwrap();
    let (header, rows) = read_csv(&path).unwrap();
    assert_eq!(header, t.columns);
    assert_eq!(rows.len(), xs.len());
    for (row, &x) in rows.iter().zip(&xs) {
        let back: f64 = row[1].parse().unwrap();
        if x == 0.0 || x.is_infinite() {
            assert_eq!(back, x);
        } else {
            assert!(((back - x) / x).abs() < 5e-12, "{back} vs {x}");
        }
        assert_eq!(row[1], format_sig12(x));
    }
    assert_eq!(rows[1][2], "row, 1");
}

#[test]
fn report_round_trips_through_json_lines() {
    let text = format!(
        "command = \"convex-split\"\nseed = 3\n[state]\ninline = \"\"\"\n{PLUS}\"\"\"\n[sigma]\ninline = \"\"\"\n{MIXED}\"\"\"\n[params]\nn = 4\n"
    );
    let report = run_command(&parse_config(&text).unwrap()).unwrap();
    let body = report.to_jsonl();
    let lines: Vec<&str> = body.lines().collect();
    assert!(lines[0].contains("\"type\":\"header\"") && lines[0].contains("\"schema_version\":1"));
    assert!(lines.last().unwrap().contains("\"type\":\"summary\""));
    let back = Report::from_jsonl(&body).unwrap();
    assert_eq!(back.header, report.header);
    assert_eq!(back.runs, report.runs);
    assert_eq!(back.summary, report.summary);
    assert_eq!(back.to_jsonl(), body);

    let dir = tempfile::tempdir().unwrap();
    report.write(dir.path()).unwrap();
    assert_eq!(Report::read(dir.path()).unwrap().to_jsonl(), body);
    let timings: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join(TIMINGS_FILE)).unwrap()).unwrap();
    assert!(timings["seconds"]["convex-split"].is_number());
    assert!(Report::from_jsonl("{\"type\":\"summary\"}").is_err());
}

#[test]
fn seeded_runs_are_byte_identical() {
    let text = "command = \"protocol\"\nseed = 99\n[free_set]\nfamily = \"coherence\"\n[state]\nrandom = \"pure\"\nlayout = \"M:2\"\n[params]\ndelta = 0.5\n";
    let cfg = parse_config(text).unwrap();
    let a = run_command(&cfg).unwrap().to_jsonl();
    let b = run_command(&cfg).unwrap().to_jsonl();
    assert_eq!(a, b);
    let mut other = cfg.clone();
    other.seed = 100;
    assert_ne!(run_command(&other).unwrap().to_jsonl(), a);
}

#[test]
fn suite_subset_runs_in_id_order() {
    let text = "command = \"suite\"\n[suite]\ncriteria = [7, 5]\n";
    let report = run_command(&parse_config(text).unwrap()).unwrap();
    let ids: Vec<&str> = report.runs.iter().map(|r| r.id.as_str()).collect();
    assert_eq!(ids, ["c05-gaussian", "c07-continuity"]);
    assert!(report.passed(), "{:?}", report.summary);
}

#[test]
fn failed_checks_set_a_nonzero_exit_code() {
    let cfg = ExperimentConfig::new(CommandKind::Suite);
    let bad = RunRecord::new(
        "x",
        "suite",
        vec![erasure_core::protocols::Check::le("made up", 2.0, 1.0, 0.0)],
        serde_json::Value::Null,
    );
    let report = Report::new(&cfg, vec![bad], Vec::new(), BTreeMap::new());
    assert_eq!(report.exit_code(), 1);
    assert_eq!(report.summary.failed_checks, 1);
    assert!((report.summary.max_violation - 1.0).abs() < 1e-12);
    let errored = RunRecord::failed("y", "suite", &Error::Unsupported("nothing".into()));
    assert_eq!(Report::new(&cfg, vec![errored], Vec::new(), BTreeMap::new()).exit_code(), 1);
}

#[test]
fn shipped_configs_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let text = std::fs::read_to_string(&path).unwrap();
            parse_config_at(&text, &dir).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 5);
}
