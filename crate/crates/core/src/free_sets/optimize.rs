//! Closest free state in relative entropy.

use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::FreeSet;
use crate::entropies::{relative_entropy, EntropyEstimate, Method};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Eigh};
use crate::qstate::{DensityMatrix, SUPPORT_REL};

#[derive(Clone, Debug)]
pub struct OptimOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
    /// Stop once the duality gap falls below this (bits).
    pub gap: f64,
}

impl Default for OptimOptions {
    fn default() -> Self {
        Self { restarts: 8, max_iter: 10_000, seed: 0x5eed, gap: 1e-7 }
    }
}

const ARMIJO: f64 = 1e-4;
/// Iterations between progress checks; a drop below `STALL_DROP` bits ends a restart.
const STALL_WINDOW: usize = 200;
const STALL_DROP: f64 = 1e-12;
/// Restarts stop after this many in a row fail to beat the best value by `RESTART_GAIN`.
const RESTART_PATIENCE: usize = 2;
const RESTART_GAIN: f64 = 1e-9;

/// `−Tr ρ log₂ σ`, infinite when `ρ` leaks outside the support of `σ`.
fn cross_entropy(rho: &CMat, eig: &Eigh, tol: f64) -> f64 {
    let v = &eig.vectors;
    let w = v.adjoint() * rho * v;
    let thr = eig.support_threshold(SUPPORT_REL);
    let mut acc = 0.0;
    let mut leak = 0.0;
    for k in 0..eig.dim() {
        let wk = w[(k, k)].re;
        if eig.values[k] > thr {
            acc -= wk * eig.values[k].log2();
        } else {
            leak += wk.max(0.0);
        }
    }
    if leak > tol {
        f64::INFINITY
    } else {
        acc
    }
}

/// Gradient of `σ ↦ −Tr ρ log₂ σ`: minus the Fréchet derivative of the logarithm
/// at `σ` applied to `ρ`, via divided differences in the eigenbasis of `σ`.
fn gradient(rho: &CMat, eig: &Eigh) -> CMat {
    let n = eig.dim();
    let v = &eig.vectors;
    let r = v.adjoint() * rho * v;
    let floor = eig.support_threshold(SUPPORT_REL).max(1e-300);
    let lam: Vec<f64> = eig.values.iter().map(|&x| x.max(floor)).collect();
    let g = Mat::from_fn(n, n, |i, j| {
        let (a, b) = (lam[i], lam[j]);
        let dd = if (a - b).abs() > 1e-12 * a.max(b) { (a.ln() - b.ln()) / (a - b) } else { 1.0 / a };
        r[(i, j)] * (-dd / std::f64::consts::LN_2)
    });
    v * g * v.adjoint()
}

impl FreeSet {
    /// `argmin_{σ∈F} D(ρ‖σ)` with the minimum.
    pub fn closest_free_relent(&self, rho: &DensityMatrix) -> Result<(DensityMatrix, EntropyEstimate)> {
        self.closest_free_relent_with(rho, &OptimOptions::default())
    }

    pub fn closest_free_relent_with(
        &self,
        rho: &DensityMatrix,
        opts: &OptimOptions,
    ) -> Result<(DensityMatrix, EntropyEstimate)> {
        self.check_supported()?;
        let layout = rho.layout();
        let closed = |sigma: DensityMatrix| -> Result<(DensityMatrix, EntropyEstimate)> {
            let e = relative_entropy(rho, &sigma)?;
            Ok((sigma, e))
        };
        if self.is_diagonal_family() {
            // D(ρ‖σ) = D(ρ‖Δρ) + D(Δρ‖σ) for diagonal σ
            let all = layout.labels();
            return closed(rho.pinch(&all)?);
        }
        if self.is_singleton() {
            return closed(self.singleton(layout)?.expect("singleton family"));
        }
        if let FreeSet::Asymmetry { .. } = self {
            // D(ρ‖σ) = D(ρ‖Tρ) + D(Tρ‖σ) for invariant σ
            let t = self.twirl(layout, rho.matrix())?;
            return closed(DensityMatrix::from_parts(layout.clone(), linalg::hermitian_part(&t), rho.tolerance()));
        }
        if self.membership(rho)? {
            return Ok((rho.clone(), EntropyEstimate { method: Method::Optimizer, ..EntropyEstimate::exact(0.0) }));
        }
        self.relent_gradient_descent(rho, opts)
    }

    /// Projected gradient descent with Armijo backtracking and random restarts;
    /// the lower end of the bracket comes from the linearization at the best iterate.
    fn relent_gradient_descent(
        &self,
        rho: &DensityMatrix,
        opts: &OptimOptions,
    ) -> Result<(DensityMatrix, EntropyEstimate)> {
        let layout = rho.layout();
        let d = layout.dim();
        let neg_entropy: f64 = rho.eigenvalues()?.into_iter().filter(|&x| x > 0.0).map(|x| x * x.log2()).sum();
        let tol = rho.tolerance();
        let rm = rho.matrix();
        let f = |s: &CMat| -> Result<(f64, Eigh)> {
            let e = linalg::eigh(s)?;
            Ok((neg_entropy + cross_entropy(rm, &e, tol), e))
        };
        let mixed = linalg::scale(&linalg::identity(d), 1.0 / d as f64);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut best: Option<(f64, CMat, f64)> = None;
        let mut idle = 0;
        for restart in 0..opts.restarts.max(1) {
            let mut x = if restart == 0 {
                mixed.clone()
            } else {
                let s = self.sample_member(layout, &mut rng)?;
                linalg::lincomb(&mixed, 0.5, s.matrix(), 0.5)
            };
            let (mut fx, mut ex) = f(&x)?;
            let mut step = 1.0;
            let mut lower = f64::NEG_INFINITY;
            let mut checkpoint = fx;
            for it in 0..opts.max_iter {
                let g = gradient(rm, &ex);
                if it % 20 == 0 {
                    // f(τ) ≥ f(x) + ⟨G, τ − x⟩ for every member τ
                    let h = self.support_function(layout, &linalg::scale(&g, -1.0))?.value;
                    lower = lower.max(fx - linalg::inner_re(&g, &x) - h);
                    if fx - lower < opts.gap {
                        break;
                    }
                }
                if it > 0 && it % STALL_WINDOW == 0 {
                    if checkpoint - fx < STALL_DROP {
                        break;
                    }
                    checkpoint = fx;
                }
                let mut accepted = false;
                while step > 1e-14 {
                    let y = self.project(layout, &linalg::lincomb(&x, 1.0, &g, -step))?;
                    let (fy, ey) = f(&y)?;
                    let diff = linalg::sub(&y, &x);
                    let moved = linalg::frobenius(&diff).powi(2);
                    if fy.is_finite() && fy <= fx - ARMIJO * moved / step {
                        let improvement = fx - fy;
                        x = y;
                        fx = fy;
                        ex = ey;
                        step *= 2.0;
                        accepted = moved > 1e-24 && improvement > 1e-15;
                        break;
                    }
                    step *= 0.5;
                }
                if !accepted {
                    break;
                }
            }
            let better = best.as_ref().map_or(true, |(bf, _, _)| fx < *bf);
            if best.as_ref().map_or(true, |(bf, _, _)| fx < *bf - RESTART_GAIN) {
                idle = 0;
            } else {
                idle += 1;
            }
            if better {
                let lb = best.as_ref().map_or(lower, |b| b.2.max(lower));
                best = Some((fx, x, lb));
            } else if let Some(b) = best.as_mut() {
                b.2 = b.2.max(lower);
            }
            if idle >= RESTART_PATIENCE || best.as_ref().is_some_and(|(bf, _, lb)| bf - lb < opts.gap) {
                break;
            }
        }
        let (value, x, mut lower) = best.expect("at least one restart");
        if value.is_finite() && value - lower >= opts.gap {
            let (_, ex) = f(&x)?;
            let g = gradient(rm, &ex);
            let w = linalg::scale(&g, -1.0);
            let h = self.support_certificate(layout, &w, linalg::inner_re(&w, &x))?;
            lower = lower.max(value - linalg::inner_re(&g, &x) - h);
        }
        if !value.is_finite() {
            return Err(Error::NonConvergence {
                message: "no free state covers the support of the input".into(),
                lower,
                upper: value,
            });
        }
        let sigma = DensityMatrix::from_parts(layout.clone(), linalg::hermitian_part(&x), rho.tolerance());
        let est = EntropyEstimate {
            value,
            epsilon: 0.0,
            method: Method::Optimizer,
            certificate: None,
            lower_bound: Some(lower.max(0.0).min(value)),
        };
        Ok((sigma, est))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;
    use crate::qstate::RegisterLayout;

    #[test]
    fn coherence_of_plus_is_one_bit() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DensityMatrix::pure(RegisterLayout::single("M", 2).unwrap(), &[re(h), re(h)]).unwrap();
        let (s, e) = FreeSet::Coherence.closest_free_relent(&plus).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
        assert!(s.approx_eq(&DensityMatrix::maximally_mixed(s.layout().clone()), 1e-12));
    }

    #[test]
    fn ppt_relent_of_bell_is_one_bit() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = DensityMatrix::pure(RegisterLayout::qubits(&["A", "B"]).unwrap(), &[re(h), re(0.0), re(0.0), re(h)])
            .unwrap();
        let f = FreeSet::separable(&["A"]);
        let opts = OptimOptions { restarts: 2, ..Default::default() };
        let (s, e) = f.closest_free_relent_with(&bell, &opts).unwrap();
        assert!(f.membership(&s).unwrap());
        assert!(e.value >= 1.0 - 1e-9 && e.value < 1.0 + 1e-3, "{}", e.value);
        assert!(e.lower_bound.unwrap() <= e.value);
    }
}
