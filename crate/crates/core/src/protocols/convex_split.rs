use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::DEFAULT_CAP_DIM;
use crate::entropies::{check_eps, smooth_dmax, MAX_ORACLE_SUPPORT};
use crate::error::{Error, Result};
use crate::linalg;
use crate::qstate::{distance_from_fidelity, fidelity_with_spectrum, DensityMatrix, Spectrum};

/// `(1/n) Σ_j σ ⊗ … ⊗ ρ_{(j)} ⊗ … ⊗ σ` on `n` copies of the common layout.
pub fn convex_split_state(rho: &DensityMatrix, sigma: &DensityMatrix, n: usize) -> Result<DensityMatrix> {
    convex_split_state_capped(rho, sigma, n, DEFAULT_CAP_DIM)
}

pub fn convex_split_state_capped(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    n: usize,
    cap: usize,
) -> Result<DensityMatrix> {
    rho.check_same_layout(sigma)?;
    if n == 0 {
        return Err(Error::domain("convex split needs n >= 1"));
    }
    let total = (rho.dim() as f64).powi(n as i32);
    if total > cap as f64 {
        return Err(Error::DimensionOverflow { dim: total.min(usize::MAX as f64) as usize, cap });
    }
    let layout = rho.layout().power(n)?;
    let d = layout.dim();
    let mut acc = linalg::zeros(d, d);
    for j in 0..n {
        let mut term = linalg::identity(1);
        for i in 0..n {
            term = linalg::kron(&term, if i == j { rho.matrix() } else { sigma.matrix() });
        }
        acc = linalg::lincomb(&acc, 1.0, &term, 1.0 / n as f64);
    }
    DensityMatrix::with_tolerance(layout, linalg::hermitian_part(&acc), rho.tolerance().max(sigma.tolerance()))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ConvexSplitCheck {
    pub n: usize,
    pub eps: f64,
    /// Smooth max-relative entropy entering the bound.
    pub k: f64,
    /// `P(τ, σ^{⊗n})`
    pub lhs: f64,
    /// `ε + √(2^k/n)`
    pub rhs: f64,
    pub ok: bool,
    /// Whether the diagonal fast path was used.
    pub classical: bool,
}

/// Compares `P(τ, σ^{⊗n})` for the convex-split state with `ε + √(2^k/n)`.
pub fn convex_split_bound_check(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    n: usize,
    eps: f64,
) -> Result<ConvexSplitCheck> {
    convex_split_bound_check_capped(rho, sigma, n, eps, DEFAULT_CAP_DIM)
}

pub fn convex_split_bound_check_capped(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    n: usize,
    eps: f64,
    cap: usize,
) -> Result<ConvexSplitCheck> {
    check_eps(eps)?;
    rho.check_same_layout(sigma)?;
    if n == 0 {
        return Err(Error::domain("convex split needs n >= 1"));
    }
    let k = smooth_dmax(rho, sigma, eps)?.value;
    if k.is_infinite() {
        return Err(Error::SupportViolation("supp(rho) is not inside supp(sigma)".into()));
    }
    let classical = rho.is_diagonal() && sigma.is_diagonal();
    let f = if classical {
        classical_split_fidelity(&rho.diagonal_probs(), &sigma.diagonal_probs(), n)?
    } else {
        let tau = convex_split_state_capped(rho, sigma, n, cap)?;
        fidelity_with_spectrum(tau.matrix(), &Spectrum::of(sigma)?.power(n))?
    };
    let lhs = distance_from_fidelity(f);
    let rhs = eps + (k.exp2() / n as f64).sqrt();
    Ok(ConvexSplitCheck { n, eps, k, lhs, rhs, ok: lhs <= rhs + 1e-9, classical })
}

/// `F(τ, q^{⊗n})` for diagonal inputs, summed over type classes:
/// `τ(x)/q^n(x) = (1/n) Σ_a c_a(x) p_a/q_a` depends only on the counts `c(x)`.
pub fn classical_split_fidelity(p: &[f64], q: &[f64], n: usize) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: q.len() });
    }
    if p.iter().zip(q).any(|(&a, &b)| a > 0.0 && b <= 0.0) {
        return Err(Error::SupportViolation("supp(p) is not inside supp(q)".into()));
    }
    // only symbols with q_a > 0 carry weight under q^n
    let symbols: Vec<(f64, f64)> = p.iter().zip(q).filter(|(_, &b)| b > 0.0).map(|(&a, &b)| (a / b, b.ln())).collect();
    let m = symbols.len();
    let classes = class_count(n, m);
    if classes > MAX_ORACLE_SUPPORT as f64 {
        return Err(Error::DimensionOverflow { dim: classes as usize, cap: MAX_ORACLE_SUPPORT });
    }
    let ln_nfact = ln_gamma(n as f64 + 1.0);
    let mut total = 0.0;
    let mut counts = vec![0usize; m];
    compositions(n, 0, &mut counts, &mut |c| {
        let mut lw = ln_nfact;
        let mut ratio = 0.0;
        for (a, &ca) in c.iter().enumerate() {
            lw += ca as f64 * symbols[a].1 - ln_gamma(ca as f64 + 1.0);
            ratio += ca as f64 * symbols[a].0;
        }
        total += lw.exp() * (ratio / n as f64).sqrt();
    });
    Ok(total.clamp(0.0, 1.0))
}

fn class_count(n: usize, m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    (ln_gamma((n + m) as f64) - ln_gamma(n as f64 + 1.0) - ln_gamma(m as f64)).exp().round()
}

fn compositions(left: usize, pos: usize, counts: &mut [usize], f: &mut dyn FnMut(&[usize])) {
    if pos + 1 == counts.len() {
        counts[pos] = left;
        f(counts);
        return;
    }
    for c in 0..=left {
        counts[pos] = c;
        compositions(left - c, pos + 1, counts, f);
    }
}
