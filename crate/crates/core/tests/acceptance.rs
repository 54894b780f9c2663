//! Runs the full-scale suite twice and prints one PASS/FAIL line per criterion.
//! A criterion passes when its run passes every check, stays within its
//! wall-clock budget, and (for determinism) the two report bodies match byte for byte.

use std::process::ExitCode;
use std::time::Instant;

use erasure_core::harness::suite::CRITERIA;
use erasure_core::harness::{run_command, CommandKind, ExperimentConfig, Report, Scale};

fn full_suite() -> (Report, f64) {
    let mut cfg = ExperimentConfig::new(CommandKind::Suite);
    cfg.suite.scale = Scale::Full;
    cfg.caps.workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let start = Instant::now();
    let report = run_command(&cfg).expect("the default suite config is valid");
    (report, start.elapsed().as_secs_f64())
}

fn main() -> ExitCode {
    let (first, t1) = full_suite();
    let (second, t2) = full_suite();
    let identical = first.to_jsonl() == second.to_jsonl();

    let mut failed = 0;
    for &(number, id, budget) in &CRITERIA {
        let Some(run) = first.runs.iter().find(|r| r.id == id) else {
            println!("FAIL criterion {number:>2} {id}: no run record");
            failed += 1;
            continue;
        };
        let secs = first.timings.get(id).copied().unwrap_or(f64::INFINITY);
        let failed_checks: Vec<&str> = run.checks.iter().filter(|c| !c.ok).map(|c| c.name.as_str()).collect();
        let mut problems = Vec::new();
        if let Some(e) = &run.error {
            problems.push(format!("error: {e}"));
        }
        if !failed_checks.is_empty() {
            problems.push(format!("failed checks: {}", failed_checks.join("; ")));
        }
        if secs > budget {
            problems.push(format!("{secs:.1} s over the {budget} s budget"));
        }
        if number == 10 && !identical {
            problems.push("two suite runs produced different report bodies".into());
        }
        let detail =
            format!("{} checks, max violation {:e}, {secs:.2} s of {budget} s", run.checks.len(), run.max_violation);
        if problems.is_empty() {
            println!("PASS criterion {number:>2} {id}: {detail}");
        } else {
            failed += 1;
            println!("FAIL criterion {number:>2} {id}: {detail}; {}", problems.join("; "));
        }
    }
    println!(
        "acceptance: {} of {} criteria passed; suite runs took {t1:.1} s and {t2:.1} s; bodies identical: {identical}",
        CRITERIA.len() - failed,
        CRITERIA.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
