//! The acceptance battery: ten numbered criteria, each one run record.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use super::config::{ExperimentConfig, Scale};
use super::report::RunRecord;
use super::run::{rate_tables, stream_seed};
use super::sources::preset_state;
use super::tables::Table;
use crate::entropies::{
    continuity_check, gaussian_cdf, gaussian_cdf_inv, smooth_dmax_classical_oracle, MAX_TRACE_DISTANCE,
};
use crate::error::Result;
use crate::free_sets::{FreeSet, SmoothFreeOptions};
use crate::linalg::{self, C64};
use crate::protocols::{
    asymptotic_rate_report_with, converse_certificate, convex_split_bound_check_capped, run_block_protocol_with,
    run_catalytic_transformation_with, run_multiparty_transformation_with, Check, ProtocolOptions, ProtocolTranscript,
};
use crate::qstate::random::{random_full_rank, random_pure, random_state};
use crate::qstate::{trace_distance, DensityMatrix, RegisterLayout};

/// Criterion number, run id and wall-clock budget in seconds.
pub const CRITERIA: [(u8, &str, f64); 10] = [
    (1, "c01-convex-split", 120.0),
    (2, "c02-achievability", 60.0),
    (3, "c03-sandwich", 120.0),
    (4, "c04-second-order", 300.0),
    (5, "c05-gaussian", 1.0),
    (6, "c06-accumulation", 60.0),
    (7, "c07-continuity", 120.0),
    (8, "c08-entanglement", 600.0),
    (9, "c09-free-set-axioms", 120.0),
    (10, "c10-determinism", 60.0),
];

pub fn criterion_id(number: u8) -> &'static str {
    CRITERIA.iter().find(|c| c.0 == number).map(|c| c.1).expect("criterion numbers run 1..=10")
}

pub fn criterion_budget(number: u8) -> f64 {
    CRITERIA.iter().find(|c| c.0 == number).map(|c| c.2).expect("criterion numbers run 1..=10")
}

/// Settings shared by every criterion of one suite run.
#[derive(Clone, Copy, Debug)]
pub struct SuiteSettings {
    pub scale: Scale,
    pub seed: u64,
    pub cap_dim: usize,
    pub classical_cap: usize,
}

impl SuiteSettings {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Self { scale: cfg.suite.scale, seed: cfg.seed, cap_dim: cfg.caps.dim, classical_cap: cfg.caps.classical }
    }

    fn pick<T>(&self, quick: T, full: T) -> T {
        match self.scale {
            Scale::Quick => quick,
            Scale::Full => full,
        }
    }

    fn rng(&self, number: u8) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(stream_seed(self.seed, 100 + number as u64))
    }

    fn options(&self) -> ProtocolOptions {
        ProtocolOptions {
            cap_dim: self.cap_dim,
            classical_cap: self.classical_cap,
            seed: self.seed,
            ..ProtocolOptions::default()
        }
    }
}

/// Runs the selected criteria on up to `caps.workers` threads; records are sorted by id.
pub fn run_suite(cfg: &ExperimentConfig) -> (Vec<RunRecord>, Vec<Table>, BTreeMap<String, f64>) {
    let settings = SuiteSettings::from_config(cfg);
    let selected: Vec<u8> =
        if cfg.suite.criteria.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { cfg.suite.criteria.clone() };
    let work = || -> Vec<(RunRecord, Vec<Table>, f64)> {
        selected
            .par_iter()
            .map(|&n| {
                let start = Instant::now();
                let (rec, tables) = run_criterion(n, &settings);
                (rec, tables, start.elapsed().as_secs_f64())
            })
            .collect()
    };
    let results = match rayon::ThreadPoolBuilder::new().num_threads(cfg.caps.workers.max(1)).build() {
        Ok(pool) => pool.install(work),
        Err(_) => work(),
    };
    let mut runs = Vec::new();
    let mut tables = Vec::new();
    let mut timings = BTreeMap::new();
    for (rec, t, secs) in results {
        timings.insert(rec.id.clone(), secs);
        runs.push(rec);
        tables.extend(t);
    }
    runs.sort_by(|a, b| a.id.cmp(&b.id));
    tables.sort_by(|a, b| a.name.cmp(&b.name));
    (runs, tables, timings)
}

/// One criterion; library errors become a failed record.
pub fn run_criterion(number: u8, s: &SuiteSettings) -> (RunRecord, Vec<Table>) {
    let id = criterion_id(number);
    let out = match number {
        1 => convex_split(s),
        2 => achievability(s),
        3 => sandwich(s),
        4 => second_order(s),
        5 => gaussian(),
        6 => accumulation(s),
        7 => continuity(s),
        8 => entanglement(s),
        9 => axioms(s),
        10 => determinism(s),
        _ => unreachable!("criterion numbers are validated"),
    };
    match out {
        Ok((checks, data, tables)) => (RunRecord::new(id, "suite", checks, data), tables),
        Err(e) => (RunRecord::failed(id, "suite", &e), Vec::new()),
    }
}

type Outcome = Result<(Vec<Check>, serde_json::Value, Vec<Table>)>;

fn qubit() -> RegisterLayout {
    RegisterLayout::single("M", 2).expect("valid layout")
}

fn convex_split(s: &SuiteSettings) -> Outcome {
    convex_split_pairs(s, s.pick(8, 50))
}

fn convex_split_pairs(s: &SuiteSettings, pairs: usize) -> Outcome {
    let mut rng = s.rng(1);
    let mut checks = Vec::new();
    let mut table = Table::new("c01_convex_split", &["pair", "eps", "n", "k", "lhs", "rhs"]);
    let mut worst: f64 = f64::NEG_INFINITY;
    for pair in 0..pairs {
        let sigma = random_full_rank(&qubit(), &mut rng);
        let rho = random_state(&qubit(), 1 + pair % 2, &mut rng)?;
        for eps in [0.0, 0.05] {
            for n in [2usize, 4, 8] {
                let c = convex_split_bound_check_capped(&rho, &sigma, n, eps, s.cap_dim)?;
                worst = worst.max(c.lhs - c.rhs);
                table.push(vec![pair.into(), eps.into(), n.into(), c.k.into(), c.lhs.into(), c.rhs.into()]);
                checks.push(Check::le(format!("pair {pair} eps={eps} n={n}"), c.lhs, c.rhs, 1e-6));
            }
        }
    }
    Ok((checks, json!({ "pairs": pairs, "max_lhs_minus_rhs": worst }), vec![table]))
}

/// Inputs for the achievability and sandwich runs. Every pure qubit has
/// `D_max(ψ‖I/2) = 1`, and the equal-weight states below have the same value
/// against the dephased state, so the pool is exactly `2/δ²`.
fn erasure_inputs(s: &SuiteSettings) -> Result<Vec<(String, FreeSet, DensityMatrix)>> {
    let mut rng = s.rng(2);
    let mut out = Vec::new();
    for name in ["zero", "plus"] {
        out.push((format!("uniformity/{name}"), FreeSet::Uniformity, preset_state(name)?.relabel(qubit())?));
    }
    for i in 0..s.pick(1, 3) {
        out.push((format!("uniformity/random-{i}"), FreeSet::Uniformity, random_pure(&qubit(), &mut rng)));
    }
    for name in ["plus", "minus", "plus-i"] {
        out.push((format!("coherence/{name}"), FreeSet::Coherence, preset_state(name)?.relabel(qubit())?));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..s.pick(1, 3) {
        let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let psi = DensityMatrix::pure(qubit(), &[C64::new(h, 0.0), C64::from_polar(h, phi)])?;
        out.push((format!("coherence/phase-{i}"), FreeSet::Coherence, psi));
    }
    Ok(out)
}

const ERASURE_DELTA: f64 = 0.5;

fn erasure_runs(
    s: &SuiteSettings,
    withhold: bool,
) -> Result<Vec<(String, FreeSet, DensityMatrix, ProtocolTranscript)>> {
    let opts = ProtocolOptions { withhold_structure: withhold, ..s.options() };
    erasure_inputs(s)?
        .into_iter()
        .map(|(name, fs, rho)| {
            let t = run_catalytic_transformation_with(&rho, &fs, 0.0, ERASURE_DELTA, &opts)?;
            Ok((name, fs, rho, t))
        })
        .collect()
}

fn achievability(s: &SuiteSettings) -> Outcome {
    let bound = ERASURE_DELTA;
    let mut checks = Vec::new();
    let mut table =
        Table::new("c02_achievability", &["run", "k", "n_copies", "distance", "catalyst_distance", "m_deviation"]);
    for (name, _, _, t) in erasure_runs(s, false)? {
        let dist = t.achieved_distance.unwrap_or(f64::INFINITY);
        let cat = t.catalyst_return_distance.unwrap_or(f64::INFINITY);
        let dev = t.output.as_ref().map_or(f64::INFINITY, |o| o.m_register_deviation);
        checks.push(Check::le(format!("{name}: distance <= eps + delta"), dist, bound, 0.0));
        checks.push(Check::le(format!("{name}: catalyst returned within eps + delta"), cat, bound, 0.0));
        checks.push(Check::le(format!("{name}: M register equals the free state"), dev, 0.0, 1e-10));
        table.push(vec![name.into(), t.k.into(), t.n_copies.into(), dist.into(), cat.into(), dev.into()]);
    }
    Ok((checks, json!({ "eps": 0.0, "delta": ERASURE_DELTA }), vec![table]))
}

fn sandwich(s: &SuiteSettings) -> Outcome {
    let slack = 2.0 * (1.0 / ERASURE_DELTA).log2();
    let mut checks = Vec::new();
    let mut table = Table::new("c03_sandwich", &["run", "factor", "converse", "log_j", "upper"]);
    for withhold in [false, true] {
        for (name, fs, rho, t) in erasure_runs(s, withhold)? {
            let tag = if withhold { format!("{name} (structure withheld)") } else { name.clone() };
            let cert = converse_certificate(&rho, &t, &fs, 0.0)?;
            let converse = cert.factor * cert.lower_bound;
            let upper = t.k + slack;
            checks.push(Check::le(format!("{tag}: converse <= log|J|"), converse, t.log_j, 1e-6));
            checks.push(Check::le(format!("{tag}: log|J| <= k + 2 log(1/delta)"), t.log_j, upper, 1e-6));
            let want = if withhold { 0.5 } else { 1.0 };
            checks.push(Check::flag(format!("{tag}: converse factor is {want}"), cert.factor == want));
            table.push(vec![tag.into(), cert.factor.into(), converse.into(), t.log_j.into(), upper.into()]);
        }
    }
    Ok((checks, json!({ "eps": 0.0, "delta": ERASURE_DELTA }), vec![table]))
}

/// Envelope constant `max r_n / log₂ n` over a range of `n`.
fn envelope(rows: &[(usize, f64)], lo: usize, hi: usize) -> f64 {
    rows.iter().filter(|(n, _)| (lo..=hi).contains(n)).map(|&(n, r)| r / (n as f64).log2()).fold(0.0, f64::max)
}

fn second_order(s: &SuiteSettings) -> Outcome {
    let p = [0.7, 0.3];
    let q = [0.5, 0.5];
    let eps = 0.2;
    let llr: Vec<f64> = p.iter().zip(&q).map(|(a, b): (&f64, &f64)| (a / b).log2()).collect();
    let d: f64 = p.iter().zip(&llr).map(|(a, l)| a * l).sum();
    let v: f64 = p.iter().zip(&llr).map(|(a, l)| a * (l - d) * (l - d)).sum();
    let z = gaussian_cdf_inv(eps)?;
    let n_hi = 14;
    let mut rows = Vec::new();
    let mut table = Table::new("c04_second_order", &["n", "exact", "expansion", "residual", "residual_over_log2n"]);
    for n in 2..=n_hi {
        // every string of length n, probabilities by product
        let strings = 1usize << n;
        let mut pn = vec![1.0; strings];
        let mut qn = vec![1.0; strings];
        for (x, (pp, qq)) in pn.iter_mut().zip(qn.iter_mut()).enumerate() {
            for bit in 0..n {
                let b = (x >> bit) & 1;
                *pp *= p[b];
                *qq *= q[b];
            }
        }
        let exact = smooth_dmax_classical_oracle(&pn, &qn, eps)?.value;
        let nf = n as f64;
        let expansion = nf * d + (nf * v).sqrt() * z;
        let r = (exact - expansion).abs();
        rows.push((n, r));
        table.push(vec![n.into(), exact.into(), expansion.into(), r.into(), (r / nf.log2()).into()]);
    }
    let c_low = envelope(&rows, 2, 8);
    let c_high = envelope(&rows, 8, n_hi);
    let c = c_low.max(c_high);
    let mut checks = Vec::new();
    for &(n, r) in &rows {
        checks.push(Check::le(format!("n={n}: residual <= c log2 n"), r, c * (n as f64).log2(), 1e-12));
    }
    checks.push(Check::le("c stable within 20% between n in 2..8 and 8..14", (c_low / c_high - 1.0).abs(), 0.2, 0.0));
    let data = json!({ "D": d, "V": v, "eps": eps, "c": c, "c_2_8": c_low, "c_8_14": c_high });
    let _ = s;
    Ok((checks, data, vec![table]))
}

fn gaussian() -> Outcome {
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for eps in [0.5, 0.25, 0.1, 0.01, 1e-4] {
        let x = gaussian_cdf_inv(eps)?;
        let bound = 2.0 * (1.0 / (2.0 * eps)).log2().max(0.0).sqrt();
        checks.push(Check::le(format!("eps={eps}: |quantile| <= 2 sqrt(log2(1/2eps))"), x.abs(), bound, 1e-12));
        let back = gaussian_cdf(x);
        checks.push(Check::le(format!("eps={eps}: cdf(quantile) = eps"), (back - eps).abs(), 0.0, 1e-10));
        rows.push(json!({ "eps": eps, "quantile": x, "bound": bound }));
    }
    Ok((checks, json!({ "rows": rows }), Vec::new()))
}

fn accumulation(s: &SuiteSettings) -> Outcome {
    let rho = preset_state("zero")?;
    let t = run_block_protocol_with(&rho, &FreeSet::Uniformity, 2, 0.3, 0.1, &s.options())?;
    let b = t.block.as_ref().ok_or_else(|| crate::Error::Numerical("block run returned no block details".into()))?;
    let per = b.per_block_distance.iter().copied().fold(0.0, f64::max);
    let mut checks = vec![
        Check::flag("two blocks", b.block_lengths.len() == 2),
        Check::le("final distance <= 2 x per-block distance", b.final_distance, 2.0 * per, 1e-8),
    ];
    checks.extend(t.checks.iter().cloned());
    let data =
        json!({ "m": 2, "gamma": 0.3, "eps": 0.1, "per_block": b.per_block_distance, "final": b.final_distance });
    Ok((checks, data, Vec::new()))
}

fn continuity(s: &SuiteSettings) -> Outcome {
    let pairs = s.pick(10, 50);
    let mut rng = s.rng(7);
    let mut checks = Vec::new();
    let mut table = Table::new("c07_continuity", &["pair", "trace_distance", "lhs", "rhs"]);
    for pair in 0..pairs {
        let rho = random_state(&qubit(), 1 + pair % 2, &mut rng)?;
        let tau = random_full_rank(&qubit(), &mut rng);
        let target: f64 = rng.gen_range(1e-3..=MAX_TRACE_DISTANCE);
        let full = trace_distance(&rho, &tau)?;
        let w = if full > target { target / full } else { 1.0 };
        let rho2 = DensityMatrix::mixture(&[(1.0 - w, &rho), (w, &tau)])?;
        let c = continuity_check(&rho, &rho2, &FreeSet::Coherence)?;
        checks.push(Check::le(
            format!("pair {pair}: trace distance <= 1/3"),
            c.trace_distance,
            MAX_TRACE_DISTANCE,
            1e-12,
        ));
        checks.push(Check::le(format!("pair {pair}: |E(rho) - E(rho')| <= bound"), c.lhs, c.rhs, 1e-6));
        table.push(vec![pair.into(), c.trace_distance.into(), c.lhs.into(), c.rhs.into()]);
    }
    Ok((checks, json!({ "pairs": pairs }), vec![table]))
}

fn entanglement(s: &SuiteSettings) -> Outcome {
    let bell = preset_state("bell")?;
    let fs = FreeSet::separable(&["A"]);
    let mut checks = Vec::new();

    let (_, k) = fs.closest_free_smooth_dmax(&bell, 0.0)?;
    let lower = k.lower_bound.unwrap_or(0.0);
    checks.push(Check::le("certified converse >= 1 bit", 1.0, lower, 1e-6));

    let parties = vec![vec!["A".to_string()], vec!["B".to_string()]];
    let t = run_multiparty_transformation_with(&bell, &fs, 0.0, ERASURE_DELTA, &parties, &s.options())?;
    let dist = t.achieved_distance.unwrap_or(f64::INFINITY);
    checks.push(Check::le("two-party distance <= eps + sqrt(2^k/n)", dist, t.distance_bound, 1e-9));
    checks.extend(t.checks.iter().map(|c| Check { name: format!("two-party: {}", c.name), ..c.clone() }));

    let n_max = s.pick(1, 2);
    let r = asymptotic_rate_report_with(&bell, &fs, &[0.0], n_max, ERASURE_DELTA, &SmoothFreeOptions::default())?;
    for row in &r.rows {
        checks.push(Check::le(format!("n={}: E/n >= 1", row.n), 1.0, row.e_over_n, 1e-6));
        checks.push(Check::le(format!("n={}: E/n <= 1.2", row.n), row.e_over_n, 1.2, 0.0));
    }
    checks.push(Check::flag("rate rows present", r.rows.len() == n_max));
    checks.extend(r.checks.iter().map(|c| Check { name: format!("rate: {}", c.name), ..c.clone() }));
    let mut tables = rate_tables(&r);
    for t in &mut tables {
        t.name = format!("c08_{}", t.name);
    }
    let data = json!({
        "min_dmax": k.value,
        "min_dmax_lower": lower,
        "two_party": { "n_copies": t.n_copies, "n_simulated": t.n_simulated, "capped": t.capped, "distance": dist, "bound": t.distance_bound },
        "rate": r,
    });
    Ok((checks, data, tables))
}

fn axiom_families() -> Vec<FreeSet> {
    let h = linalg::diag_real(&[0.0, 1.0]);
    vec![
        FreeSet::Coherence,
        FreeSet::Uniformity,
        FreeSet::gibbs(1.0, vec![("A".into(), h.clone()), ("B".into(), h)]),
        FreeSet::Asymmetry { group: vec![linalg::identity(2), linalg::diag_real(&[1.0, -1.0])], labels: Vec::new() },
        FreeSet::separable(&["A"]),
        FreeSet::SharedRandomness { parties: 2 },
    ]
}

fn axioms(s: &SuiteSettings) -> Outcome {
    axioms_with(s, s.pick(10, 100))
}

fn axioms_with(s: &SuiteSettings, samples: usize) -> Outcome {
    let layout = RegisterLayout::qubits(&["A", "B"])?;
    let mut rng = s.rng(9);
    let mut checks = Vec::new();
    let mut table = Table::new("c09_axioms", &["family", "property", "trials", "failures"]);
    let mut reports = Vec::new();
    for fs in axiom_families() {
        let rep = fs.axiom_check(&layout, samples, &mut rng)?;
        for t in &rep.tallies {
            checks.push(Check::le(format!("{}: {}", rep.family, t.property), t.failures as f64, 0.0, 0.0));
            table.push(vec![
                rep.family.as_str().into(),
                t.property.as_str().into(),
                t.trials.into(),
                t.failures.into(),
            ]);
        }
        reports.push(rep);
    }
    Ok((checks, json!({ "samples": samples, "reports": reports }), vec![table]))
}

/// Repeats two seeded criteria and compares the serialized records.
fn determinism(s: &SuiteSettings) -> Outcome {
    let render = |o: Outcome| -> Result<String> {
        let (checks, data, _) = o?;
        Ok(serde_json::to_string(&(checks, data)).expect("records serialize"))
    };
    let mut checks = Vec::new();
    let a = render(convex_split_pairs(s, 3))?;
    let b = render(convex_split_pairs(s, 3))?;
    checks.push(Check::flag("convex-split records repeat byte for byte", a == b));
    let a = render(axioms_with(s, 5))?;
    let b = render(axioms_with(s, 5))?;
    checks.push(Check::flag("free-set axiom records repeat byte for byte", a == b));
    Ok((checks, json!({ "compared": ["c01 with 3 pairs", "c09 with 5 samples"] }), Vec::new()))
}
