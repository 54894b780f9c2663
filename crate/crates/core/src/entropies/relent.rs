use faer::Mat;

use super::EntropyEstimate;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Eigh};
use crate::qstate::{DensityMatrix, SUPPORT_REL};

/// Eigen-data of the reference state restricted to its support.
pub(crate) struct Support {
    pub eig: Eigh,
    pub idx: Vec<usize>,
    pub outside: Vec<usize>,
}

impl Support {
    pub fn of(sigma: &DensityMatrix) -> Result<Self> {
        let eig = sigma.eigh()?;
        let thr = eig.support_threshold(SUPPORT_REL);
        let idx = eig.support_indices(thr);
        let outside = (0..eig.dim()).filter(|k| !idx.contains(k)).collect();
        Ok(Self { eig, idx, outside })
    }

    /// `diag(V† ρ V)` in the eigenbasis of the reference state.
    pub fn weights(&self, rho: &CMat) -> Vec<f64> {
        let v = &self.eig.vectors;
        let rv = rho * v;
        (0..self.eig.dim())
            .map(|k| {
                let mut acc = 0.0;
                for i in 0..v.nrows() {
                    acc += (v[(i, k)].conj() * rv[(i, k)]).re;
                }
                acc
            })
            .collect()
    }

    /// Weight of `rho` outside the support.
    pub fn leakage(&self, rho: &CMat) -> f64 {
        let w = self.weights(rho);
        self.outside.iter().map(|&k| w[k].max(0.0)).sum()
    }
}

fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// Threshold on leaked weight beyond which the support condition counts as violated.
pub(crate) fn leak_tol(rho: &DensityMatrix) -> f64 {
    rho.tolerance()
}

fn classical_relent(p: &[f64], q: &[f64], tol: f64) -> f64 {
    let qmax = q.iter().copied().fold(0.0, f64::max);
    let mut d = 0.0;
    let mut leak = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi <= 0.0 {
            continue;
        }
        if qi <= SUPPORT_REL * qmax {
            leak += pi;
            continue;
        }
        d += pi * (pi / qi).log2();
    }
    if leak > tol {
        f64::INFINITY
    } else {
        d
    }
}

/// `D(ρ‖σ) = Tr ρ log ρ − Tr ρ log σ` in bits.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<EntropyEstimate> {
    rho.check_same_layout(sigma)?;
    if rho.is_diagonal() && sigma.is_diagonal() {
        let v = classical_relent(&rho.diagonal_probs(), &sigma.diagonal_probs(), leak_tol(rho));
        return Ok(EntropyEstimate::exact(v));
    }
    let sup = Support::of(sigma)?;
    let w = sup.weights(rho.matrix());
    let leak: f64 = sup.outside.iter().map(|&k| w[k].max(0.0)).sum();
    if leak > leak_tol(rho) {
        return Ok(EntropyEstimate::exact(f64::INFINITY));
    }
    let neg_entropy: f64 = rho.eigenvalues()?.into_iter().map(xlog2x).sum();
    let cross: f64 = sup.idx.iter().map(|&k| w[k] * sup.eig.values[k].log2()).sum();
    Ok(EntropyEstimate::exact(neg_entropy - cross))
}

/// `V(ρ‖σ) = Tr ρ (log ρ − log σ)² − D(ρ‖σ)²` in bits².
pub fn relative_entropy_variance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<EntropyEstimate> {
    rho.check_same_layout(sigma)?;
    if rho.is_diagonal() && sigma.is_diagonal() {
        let p = rho.diagonal_probs();
        let q = sigma.diagonal_probs();
        let d = classical_relent(&p, &q, leak_tol(rho));
        if d.is_infinite() {
            return Err(Error::SupportViolation("supp(rho) is not inside supp(sigma)".into()));
        }
        let qmax = q.iter().copied().fold(0.0, f64::max);
        let second: f64 = p
            .iter()
            .zip(&q)
            .filter(|(&pi, &qi)| pi > 0.0 && qi > SUPPORT_REL * qmax)
            .map(|(&pi, &qi)| pi * (pi / qi).log2().powi(2))
            .sum();
        return Ok(EntropyEstimate::exact((second - d * d).max(0.0)));
    }
    let d = relative_entropy(rho, sigma)?.value;
    if d.is_infinite() {
        return Err(Error::SupportViolation("supp(rho) is not inside supp(sigma)".into()));
    }
    let er = rho.eigh()?;
    let rthr = er.support_threshold(SUPPORT_REL);
    let log_rho = er.apply(|x| if x > rthr { x.log2() } else { 0.0 });
    let sqrt_rho = er.apply(|x| x.max(0.0).sqrt());
    let es = sigma.eigh()?;
    let sthr = es.support_threshold(SUPPORT_REL);
    let log_sigma = es.apply(|x| if x > sthr { x.log2() } else { 0.0 });
    let l = linalg::sub(&log_rho, &log_sigma);
    let y = &sqrt_rho * &l;
    let second = linalg::frobenius(&y).powi(2);
    Ok(EntropyEstimate::exact((second - d * d).max(0.0)))
}

/// `D_max(ρ‖σ) = log λ_max(σ^{-1/2} ρ σ^{-1/2})` on the support of `σ`.
pub fn dmax(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<EntropyEstimate> {
    rho.check_same_layout(sigma)?;
    Ok(EntropyEstimate::exact(dmax_matrix(rho.matrix(), sigma, leak_tol(rho))?))
}

pub(crate) fn dmax_matrix(rho: &CMat, sigma: &DensityMatrix, tol: f64) -> Result<f64> {
    if sigma.is_diagonal() && linalg::max_abs(&off_diag(rho)) <= tol {
        let q = sigma.diagonal_probs();
        let qmax = q.iter().copied().fold(0.0, f64::max);
        let mut best: f64 = 0.0;
        for (i, &qi) in q.iter().enumerate() {
            let pi = rho[(i, i)].re;
            if qi > SUPPORT_REL * qmax {
                best = best.max(pi / qi);
            } else if pi > tol {
                return Ok(f64::INFINITY);
            }
        }
        return Ok(best.log2());
    }
    let sup = Support::of(sigma)?;
    dmax_with_support(rho, &sup, tol)
}

pub(crate) fn dmax_with_support(rho: &CMat, sup: &Support, tol: f64) -> Result<f64> {
    if sup.leakage(rho) > tol {
        return Ok(f64::INFINITY);
    }
    let v = sup.eig.columns(&sup.idx);
    let s: Vec<f64> = sup.idx.iter().map(|&k| 1.0 / sup.eig.values[k].sqrt()).collect();
    let mut m = v.adjoint() * rho * &v;
    let r = sup.idx.len();
    for j in 0..r {
        for i in 0..r {
            m[(i, j)] *= s[i] * s[j];
        }
    }
    let top = linalg::eigvalsh(&m)?.last().copied().unwrap_or(0.0);
    Ok(top.max(0.0).log2())
}

fn off_diag(m: &CMat) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| if i == j { linalg::ZERO } else { m[(i, j)] })
}
