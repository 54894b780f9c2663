//! Smooth max-relative entropy of commuting pairs by water-filling.
//!
//! For a ratio budget `r` the best smoothed distribution is
//! `x_i = min(r q_i, κ p_i)` with `κ` fixing the total mass, so the achievable
//! fidelity is monotone in `r` and the smallest admissible `r` is found by
//! bisection on `log r`.

use super::{check_eps, EntropyEstimate, Method};
use crate::error::{Error, Result};

pub const MAX_ORACLE_SUPPORT: usize = 1 << 20;

/// Largest `Σ √(p_i x_i)` over `0 ≤ x_i ≤ r q_i`, `Σ x_i ≤ 1`.
fn best_fidelity(p: &[f64], q: &[f64], r: f64) -> f64 {
    // pairs (cap, p) on supp p, sorted by cap/p
    let mut items: Vec<(f64, f64)> =
        p.iter().zip(q).filter(|(&pi, _)| pi > 0.0).map(|(&pi, &qi)| (r * qi, pi)).collect();
    let total_cap: f64 = items.iter().map(|x| x.0).sum();
    if total_cap <= 1.0 {
        return items.iter().map(|(c, pi)| (c * pi).sqrt()).sum::<f64>().min(1.0);
    }
    items.sort_by(|a, b| (a.0 / a.1).total_cmp(&(b.0 / b.1)));
    // g(κ) = Σ min(c_i, κ p_i); with the first k items capped:
    // g = Σ_{<k} c_i + κ Σ_{≥k} p_i
    let mut capped = 0.0;
    let mut rest_p: f64 = items.iter().map(|x| x.1).sum();
    let mut kappa = 0.0;
    let mut split = items.len();
    for (k, &(c, pi)) in items.iter().enumerate() {
        let t = c / pi;
        if capped + t * rest_p >= 1.0 {
            kappa = (1.0 - capped) / rest_p;
            split = k;
            break;
        }
        capped += c;
        rest_p -= pi;
    }
    let mut f = 0.0;
    for (k, &(c, pi)) in items.iter().enumerate() {
        let x = if k < split { c } else { kappa * pi };
        f += (pi * x).sqrt();
    }
    f.min(1.0)
}

/// Independent oracle for `D_max^ε(p‖q)` over normalized distributions.
pub fn smooth_dmax_classical_oracle(p: &[f64], q: &[f64], eps: f64) -> Result<EntropyEstimate> {
    check_eps(eps)?;
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: q.len() });
    }
    if p.len() > MAX_ORACLE_SUPPORT {
        return Err(Error::DimensionOverflow { dim: p.len(), cap: MAX_ORACLE_SUPPORT });
    }
    for v in [p, q] {
        if v.iter().any(|&x| !(x >= 0.0)) || (v.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState("oracle needs probability vectors".into()));
        }
    }
    let target = (1.0 - eps * eps).sqrt();
    let est = |value: f64, lower: f64| EntropyEstimate {
        value,
        epsilon: eps,
        method: Method::ClassicalBruteforce,
        certificate: None,
        lower_bound: Some(lower),
    };
    let on_q: f64 = p.iter().zip(q).filter(|(_, &qi)| qi > 0.0).map(|(&pi, _)| pi).sum();
    if on_q.sqrt() < target - 1e-15 {
        return Ok(est(f64::INFINITY, f64::INFINITY));
    }
    let max_ratio =
        p.iter().zip(q).filter(|(&pi, &qi)| pi > 0.0 && qi > 0.0).map(|(&pi, &qi)| pi / qi).fold(0.0, f64::max);
    if eps == 0.0 {
        let v = if on_q < 1.0 - 1e-15 { f64::INFINITY } else { max_ratio.log2() };
        return Ok(est(v, v));
    }
    if best_fidelity(p, q, 1.0) >= target {
        return Ok(est(0.0, 0.0));
    }
    let mut hi = max_ratio.max(1.0).log2();
    while best_fidelity(p, q, hi.exp2()) < target {
        hi = 2.0 * hi + 1.0;
        if hi > 4096.0 {
            return Ok(est(f64::INFINITY, f64::INFINITY));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        if hi - lo < 1e-13 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if best_fidelity(p, q, mid.exp2()) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(est(hi, lo))
}

struct TypeMasses<'a> {
    p: &'a [f64],
    q: &'a [f64],
    ln_fact: Vec<f64>,
    n: usize,
    out_p: Vec<f64>,
    out_q: Vec<f64>,
}

impl TypeMasses<'_> {
    /// Enumerates the count vectors of length-`n` strings, position by position.
    fn visit(&mut self, pos: usize, left: usize, counts: &mut [usize]) {
        if pos == counts.len() - 1 {
            counts[pos] = left;
            let ln_mult = self.ln_fact[self.n] - counts.iter().map(|&c| self.ln_fact[c]).sum::<f64>();
            let mass = |v: &[f64]| -> f64 {
                let mut s = ln_mult;
                for (&c, &x) in counts.iter().zip(v) {
                    if c > 0 {
                        if x <= 0.0 {
                            return 0.0;
                        }
                        s += c as f64 * x.ln();
                    }
                }
                s.exp()
            };
            let (mp, mq) = (mass(self.p), mass(self.q));
            self.out_p.push(mp);
            self.out_q.push(mq);
            return;
        }
        for c in 0..=left {
            counts[pos] = c;
            self.visit(pos + 1, left - c, counts);
        }
    }
}

/// Aggregated masses of `p^{⊗n}` and `q^{⊗n}` over outcome types.
///
/// Outcomes sharing a type have equal probabilities under both products, so the
/// smooth max-relative entropy of the class vectors equals that of the full products.
pub fn iid_classes(p: &[f64], q: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if p.len() != q.len() || p.is_empty() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: q.len() });
    }
    let mut ln_fact = vec![0.0; n + 1];
    for i in 1..=n {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let mut types = TypeMasses { p, q, ln_fact, n, out_p: Vec::new(), out_q: Vec::new() };
    types.visit(0, n, &mut vec![0usize; p.len()]);
    let TypeMasses { mut out_p, mut out_q, .. } = types;
    if out_p.len() > MAX_ORACLE_SUPPORT {
        return Err(Error::DimensionOverflow { dim: out_p.len(), cap: MAX_ORACLE_SUPPORT });
    }
    // renormalize away rounding in the log-domain masses
    for v in [&mut out_p, &mut out_q] {
        let s: f64 = v.iter().sum();
        for x in v.iter_mut() {
            *x /= s;
        }
    }
    Ok((out_p, out_q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_zero_is_max_ratio() {
        let e = smooth_dmax_classical_oracle(&[0.9, 0.1], &[0.5, 0.5], 0.0).unwrap();
        assert!((e.value - 1.8f64.log2()).abs() < 1e-15);
    }

    #[test]
    fn equal_inputs_give_zero() {
        let e = smooth_dmax_classical_oracle(&[0.3, 0.7], &[0.3, 0.7], 0.2).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn classes_sum_to_one() {
        let (a, b) = iid_classes(&[0.7, 0.3], &[0.5, 0.5], 10).unwrap();
        assert_eq!(a.len(), 11);
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
