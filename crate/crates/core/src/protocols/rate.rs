//! Finite-`n` brackets on the asymptotic randomness rate.

use serde::{Deserialize, Serialize};

use super::transcript::Check;
use crate::entropies::check_eps;
use crate::error::{Error, Result};
use crate::free_sets::{FreeSet, SmoothFreeOptions, MAX_REGULARIZED_DIM};
use crate::qstate::DensityMatrix;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RateRow {
    pub eps: f64,
    pub n: usize,
    /// `(k_n + 2 log₂(1/δ)) / n`
    pub achievable: f64,
    /// `k_n / n` with `k_n` the attained `min_σ D_max^ε(ρ^{⊗n}‖σ)`.
    pub k_over_n: f64,
    /// Relative entropy of resource with the continuity correction for the ball.
    pub converse: f64,
    /// Certified lower end of `min_σ D_max^ε(ρ^{⊗n}‖σ)`, divided by `n`.
    pub converse_dmax: f64,
    #[serde(rename = "E_over_n")]
    pub e_over_n: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RateReport {
    pub family: String,
    pub delta: f64,
    /// `inf_τ ‖log₂ τ‖_∞` on one copy.
    pub log_norm: Option<f64>,
    pub rows: Vec<RateRow>,
    pub skipped: Option<String>,
    pub checks: Vec<Check>,
}

impl RateReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }
}

pub fn asymptotic_rate_report(
    rho: &DensityMatrix,
    free_set: &FreeSet,
    eps_list: &[f64],
    n_max: usize,
) -> Result<RateReport> {
    asymptotic_rate_report_with(rho, free_set, eps_list, n_max, 0.1, &SmoothFreeOptions::default())
}

pub fn asymptotic_rate_report_with(
    rho: &DensityMatrix,
    free_set: &FreeSet,
    eps_list: &[f64],
    n_max: usize,
    delta: f64,
    opts: &SmoothFreeOptions,
) -> Result<RateReport> {
    free_set.check_supported()?;
    for &e in eps_list {
        check_eps(e)?;
    }
    if n_max == 0 {
        return Err(Error::domain("n_max must be at least 1"));
    }
    let layout = rho.layout();
    let mut report = RateReport {
        family: free_set.name().into(),
        delta,
        log_norm: None,
        rows: Vec::new(),
        skipped: None,
        checks: Vec::new(),
    };
    let c1 = free_set.inf_log_norm(layout)?;
    if !c1.is_finite() {
        report.skipped = Some("every free state is rank deficient, so the continuity constant is infinite".into());
        return Ok(report);
    }
    report.log_norm = Some(c1);
    let d = rho.dim() as f64;
    let mut n_top = n_max;
    while n_top > 0 && d.powi(n_top as i32) > MAX_REGULARIZED_DIM as f64 {
        n_top -= 1;
    }
    if n_top < n_max {
        report.skipped = Some(format!("n limited to {n_top} by the dimension budget {MAX_REGULARIZED_DIM}"));
    }
    if n_top == 0 {
        return Ok(report);
    }
    let e_seq = free_set.regularized_e(rho, n_top)?;

    for &eps in eps_list {
        for n in 1..=n_top {
            let state = if n == 1 { rho.clone() } else { rho.tensor_power(n)? };
            let family = if n == 1 { free_set.clone() } else { free_set.relaxed() };
            let (_, est) = family.closest_free_smooth_dmax_with(&state, eps, opts)?;
            let nf = n as f64;
            let k = est.value;
            let e_n = e_seq[n - 1].value * nf;
            // purified distance ε bounds the trace norm by 2ε
            let t = 2.0 * eps;
            let converse = if t == 0.0 {
                e_n / nf
            } else if t <= 1.0 / 3.0 {
                let c_n = free_set.inf_log_norm(state.layout())?;
                let corr = t * (nf * d.log2() + c_n) + t * (1.0 / t).log2() + 4.0 * t;
                ((e_n - corr) / nf).max(0.0)
            } else {
                0.0
            };
            report.rows.push(RateRow {
                eps,
                n,
                achievable: (k + 2.0 * (1.0 / delta).log2()) / nf,
                k_over_n: k / nf,
                converse,
                converse_dmax: est.lower_bound.unwrap_or(0.0) / nf,
                e_over_n: e_n / nf,
            });
        }
    }

    for r in &report.rows {
        let tag = format!("eps={} n={}", r.eps, r.n);
        report.checks.push(Check::le(format!("{tag}: converse <= k/n"), r.converse, r.k_over_n, 1e-6));
        report.checks.push(Check::le(format!("{tag}: certified k/n <= k/n"), r.converse_dmax, r.k_over_n, 1e-9));
        report.checks.push(Check::le(format!("{tag}: k/n <= achievable"), r.k_over_n, r.achievable, 1e-12));
        report.checks.push(Check::le(format!("{tag}: converse <= E/n"), r.converse, r.e_over_n, 1e-9));
    }
    for w in e_seq.windows(2).enumerate() {
        let (i, pair) = w;
        report.checks.push(Check::le(format!("E/n nonincreasing at n={}", i + 2), pair[1].value, pair[0].value, 1e-6));
    }
    Ok(report)
}
