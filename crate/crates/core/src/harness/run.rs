//! Dispatch from a validated configuration to the library operations.

use std::collections::BTreeMap;
use std::time::Instant;

use serde_json::{json, Value};

use super::config::{CommandKind, ExperimentConfig};
use super::report::{Report, RunRecord};
use super::sources::{build_free_set, resolve_state};
use super::suite::run_suite;
use super::tables::Table;
use crate::entropies::{dmax, relative_entropy, relative_entropy_variance, second_order_dmax, smooth_dmax};
use crate::error::Result;
use crate::free_sets::FreeSet;
use crate::free_sets::SmoothFreeOptions;
use crate::protocols::{
    asymptotic_rate_report_with, converse_certificate, convex_split_bound_check_capped, run_block_protocol_with,
    run_catalytic_transformation_with, run_multiparty_transformation_with, Check, ProtocolOptions, ProtocolTranscript,
    DEFAULT_DELTA,
};
use crate::qstate::DensityMatrix;

const STATE_STREAM: u64 = 1;
const SIGMA_STREAM: u64 = 2;

/// Seed for the random draws of one named part of a run.
pub(crate) fn stream_seed(seed: u64, stream: u64) -> u64 {
    seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

pub(crate) fn protocol_options(cfg: &ExperimentConfig) -> ProtocolOptions {
    ProtocolOptions {
        cap_dim: cfg.caps.dim,
        classical_cap: cfg.caps.classical,
        withhold_structure: cfg.params.withhold_structure,
        seed: cfg.seed,
        ..ProtocolOptions::default()
    }
}

fn state(cfg: &ExperimentConfig) -> Result<DensityMatrix> {
    let src = cfg.state.as_ref().expect("validated: state present");
    resolve_state(src, &cfg.base_dir, stream_seed(cfg.seed, STATE_STREAM))
}

fn sigma(cfg: &ExperimentConfig) -> Result<Option<DensityMatrix>> {
    cfg.sigma.as_ref().map(|src| resolve_state(src, &cfg.base_dir, stream_seed(cfg.seed, SIGMA_STREAM))).transpose()
}

fn family(cfg: &ExperimentConfig) -> Result<Option<FreeSet>> {
    cfg.free_set.as_ref().map(|fs| build_free_set(fs, &cfg.base_dir)).transpose()
}

fn eps_or_zero(cfg: &ExperimentConfig) -> f64 {
    cfg.params.eps.unwrap_or(0.0)
}

/// Runs the configured command. Errors from the library stop single commands;
/// inside a suite they turn into failed records.
pub fn run_command(cfg: &ExperimentConfig) -> Result<Report> {
    super::config::validate(cfg)?;
    if cfg.command == CommandKind::Suite {
        let (runs, tables, timings) = run_suite(cfg);
        return Ok(Report::new(cfg, runs, tables, timings));
    }
    let start = Instant::now();
    let (runs, tables) = match cfg.command {
        CommandKind::Entropy => entropy(cfg)?,
        CommandKind::ConvexSplit => convex_split(cfg)?,
        CommandKind::Protocol => protocol(cfg)?,
        CommandKind::Multiparty => multiparty(cfg)?,
        CommandKind::Block => block(cfg)?,
        CommandKind::Rate => rate(cfg)?,
        CommandKind::Converse => converse(cfg)?,
        CommandKind::Suite => unreachable!("handled above"),
    };
    let mut timings = BTreeMap::new();
    timings.insert(cfg.command.as_str().to_string(), start.elapsed().as_secs_f64());
    Ok(Report::new(cfg, runs, tables, timings))
}

type Outcome = (Vec<RunRecord>, Vec<Table>);

fn entropy(cfg: &ExperimentConfig) -> Result<Outcome> {
    let rho = state(cfg)?;
    let eps = eps_or_zero(cfg);
    let mut table = Table::new("entropy", &["quantity", "value", "lower_bound", "method"]);
    let mut checks = Vec::new();
    let mut data = serde_json::Map::new();
    if let Some(s) = sigma(cfg)? {
        let d = relative_entropy(&rho, &s)?;
        let v = relative_entropy_variance(&rho, &s)?;
        let dm = dmax(&rho, &s)?;
        let sm = smooth_dmax(&rho, &s, eps)?;
        let mut rows = vec![("relative_entropy", &d), ("variance", &v), ("dmax", &dm), ("smooth_dmax", &sm)];
        let so = match cfg.params.n {
            Some(n) if eps > 0.0 && d.value.is_finite() => Some(second_order_dmax(&rho, &s, n, eps)?),
            _ => None,
        };
        if let Some(so) = &so {
            rows.push(("second_order_dmax", so));
        }
        for (name, est) in rows {
            table.push(vec![
                name.into(),
                est.value.into(),
                est.lower_bound.unwrap_or(f64::NAN).into(),
                format!("{:?}", est.method).into(),
            ]);
            data.insert(name.into(), serde_json::to_value(est.record()).expect("record serializes"));
        }
        checks.push(Check::le("relative entropy <= dmax", d.value, dm.value, 1e-9));
        checks.push(Check::le("smooth dmax <= dmax", sm.value, dm.value, 1e-9));
        if let Some(l) = sm.lower_bound {
            checks.push(Check::le("smooth dmax bracket ordered", l, sm.value, 1e-9));
        }
    }
    if let Some(fs) = family(cfg)? {
        let (sig_e, e) = fs.closest_free_relent(&rho)?;
        let (sig_k, k) = fs.closest_free_smooth_dmax(&rho, eps)?;
        for (name, est) in [("free_relative_entropy", &e), ("free_smooth_dmax", &k)] {
            table.push(vec![
                name.into(),
                est.value.into(),
                est.lower_bound.unwrap_or(f64::NAN).into(),
                format!("{:?}", est.method).into(),
            ]);
            data.insert(name.into(), serde_json::to_value(est.record()).expect("record serializes"));
        }
        checks.push(Check::flag("closest state for E is free", fs.relaxed().membership(&sig_e)?));
        checks.push(Check::flag("closest state for smooth dmax is free", fs.relaxed().membership(&sig_k)?));
        if let Some(l) = e.lower_bound {
            checks.push(Check::le("E bracket ordered", l, e.value, 1e-9));
        }
        if let Some(l) = k.lower_bound {
            checks.push(Check::le("free smooth dmax bracket ordered", l, k.value, 1e-9));
        }
        data.insert("family".into(), json!(fs.name()));
    }
    data.insert("eps".into(), json!(eps));
    Ok((vec![RunRecord::new("entropy", "entropy", checks, Value::Object(data))], vec![table]))
}

fn convex_split(cfg: &ExperimentConfig) -> Result<Outcome> {
    let rho = state(cfg)?;
    let s = sigma(cfg)?.expect("validated: sigma present");
    let ns: Vec<usize> =
        if !cfg.params.n_list.is_empty() { cfg.params.n_list.clone() } else { vec![cfg.params.n.unwrap_or(2)] };
    let epss: Vec<f64> =
        if !cfg.params.eps_list.is_empty() { cfg.params.eps_list.clone() } else { vec![eps_or_zero(cfg)] };
    let mut table = Table::new("convex_split", &["n", "eps", "k", "lhs", "rhs", "ok"]);
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for &eps in &epss {
        for &n in &ns {
            let c = convex_split_bound_check_capped(&rho, &s, n, eps, cfg.caps.dim)?;
            table.push(vec![n.into(), eps.into(), c.k.into(), c.lhs.into(), c.rhs.into(), c.ok.into()]);
            checks.push(Check::le(
                format!("n={n} eps={eps}: P(split, sigma^n) <= eps + sqrt(2^k/n)"),
                c.lhs,
                c.rhs,
                1e-9,
            ));
            rows.push(c);
        }
    }
    let data = json!({ "rows": rows });
    Ok((vec![RunRecord::new("convex-split", "convex-split", checks, data)], vec![table]))
}

fn transcript_table(t: &ProtocolTranscript) -> Table {
    let mut table = Table::new("protocol", &["quantity", "value"]);
    let mut row = |name: &str, v: f64| table.push(vec![name.into(), v.into()]);
    row("k", t.k);
    row("k_lower", t.k_lower);
    row("n_copies", t.n_copies as f64);
    row("n_simulated", t.n_simulated as f64);
    row("log_j", t.log_j);
    row("achieved_distance", t.achieved_distance.unwrap_or(f64::NAN));
    row("distance_bound", t.distance_bound);
    row("catalyst_return_distance", t.catalyst_return_distance.unwrap_or(f64::NAN));
    row("converse_lower_bound", t.converse_lower_bound);
    row("converse_factor", t.converse_factor);
    table
}

fn transcript_record(id: &str, t: &ProtocolTranscript) -> RunRecord {
    RunRecord::new(id, id, t.checks.clone(), serde_json::to_value(t).expect("transcript serializes"))
}

fn protocol(cfg: &ExperimentConfig) -> Result<Outcome> {
    let rho = state(cfg)?;
    let fs = family(cfg)?.expect("validated: free set present");
    let t = run_catalytic_transformation_with(
        &rho,
        &fs,
        eps_or_zero(cfg),
        cfg.params.delta.unwrap_or(DEFAULT_DELTA),
        &protocol_options(cfg),
    )?;
    Ok((vec![transcript_record("protocol", &t)], vec![transcript_table(&t)]))
}

fn multiparty(cfg: &ExperimentConfig) -> Result<Outcome> {
    let rho = state(cfg)?;
    let fs = family(cfg)?.expect("validated: free set present");
    let labels: Vec<String> = rho.layout().labels().iter().map(|s| s.to_string()).collect();
    let t_parties = cfg.params.t.unwrap_or(labels.len());
    if t_parties != labels.len() {
        return Err(crate::Error::Config(format!(
            "params.t = {t_parties} but the state has {} registers (one per party)",
            labels.len()
        )));
    }
    let parties: Vec<Vec<String>> = labels.into_iter().map(|l| vec![l]).collect();
    let t = run_multiparty_transformation_with(
        &rho,
        &fs,
        eps_or_zero(cfg),
        cfg.params.delta.unwrap_or(DEFAULT_DELTA),
        &parties,
        &protocol_options(cfg),
    )?;
    Ok((vec![transcript_record("multiparty", &t)], vec![transcript_table(&t)]))
}

fn block(cfg: &ExperimentConfig) -> Result<Outcome> {
    let rho = state(cfg)?;
    let fs = family(cfg)?.expect("validated: free set present");
    let p = &cfg.params;
    let t = run_block_protocol_with(
        &rho,
        &fs,
        p.m.expect("validated"),
        p.gamma.expect("validated"),
        p.eps.expect("validated"),
        &protocol_options(cfg),
    )?;
    let mut tables = vec![transcript_table(&t)];
    if let Some(b) = &t.block {
        let mut table = Table::new("block", &["block", "length", "distance"]);
        for (i, (&len, &d)) in b.block_lengths.iter().zip(&b.per_block_distance).enumerate() {
            table.push(vec![(i + 1).into(), len.into(), d.into()]);
        }
        tables.push(table);
    }
    Ok((vec![transcript_record("block", &t)], tables))
}

/// One table per smoothing parameter with columns `n, achievable, converse, E_over_n`.
pub(crate) fn rate_tables(report: &crate::protocols::RateReport) -> Vec<Table> {
    let mut epss: Vec<f64> = Vec::new();
    for r in &report.rows {
        if !epss.contains(&r.eps) {
            epss.push(r.eps);
        }
    }
    epss.iter()
        .map(|&eps| {
            let name = if epss.len() == 1 { "rate".to_string() } else { format!("rate-eps{eps}") };
            let mut t = Table::new(name, &["n", "achievable", "converse", "E_over_n"]);
            for r in report.rows.iter().filter(|r| r.eps == eps) {
                t.push(vec![r.n.into(), r.achievable.into(), r.converse.into(), r.e_over_n.into()]);
            }
            t
        })
        .collect()
}

fn rate(cfg: &ExperimentConfig) -> Result<Outcome> {
    let rho = state(cfg)?;
    let fs = family(cfg)?.expect("validated: free set present");
    let p = &cfg.params;
    let epss: Vec<f64> = if !p.eps_list.is_empty() { p.eps_list.clone() } else { vec![eps_or_zero(cfg)] };
    let r = asymptotic_rate_report_with(
        &rho,
        &fs,
        &epss,
        p.n_max.unwrap_or(3),
        p.delta.unwrap_or(DEFAULT_DELTA),
        &SmoothFreeOptions::default(),
    )?;
    let tables = rate_tables(&r);
    let record =
        RunRecord::new("rate", "rate", r.checks.clone(), serde_json::to_value(&r).expect("rate report serializes"));
    Ok((vec![record], tables))
}

fn converse(cfg: &ExperimentConfig) -> Result<Outcome> {
    let rho = state(cfg)?;
    let fs = family(cfg)?.expect("validated: free set present");
    let eps = eps_or_zero(cfg);
    let t = run_catalytic_transformation_with(
        &rho,
        &fs,
        eps,
        cfg.params.delta.unwrap_or(DEFAULT_DELTA),
        &protocol_options(cfg),
    )?;
    let cert = converse_certificate(&rho, &t, &fs, eps)?;
    let mut checks = t.checks.clone();
    checks.push(Check::le(
        "factor * certified lower bound <= log|J|",
        cert.factor * cert.lower_bound,
        cert.log_j,
        1e-6,
    ));
    let data = json!({ "certificate": cert, "transcript": t });
    Ok((vec![RunRecord::new("converse", "converse", checks, data)], vec![transcript_table(&t)]))
}
