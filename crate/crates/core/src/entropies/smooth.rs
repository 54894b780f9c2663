//! Smooth max-relative entropy as the infimum over the purified-distance ball.
//!
//! Bisection on `λ`. For fixed `λ` the question is whether some state `ρ'` with
//! `ρ' ⪯ 2^λ σ` reaches fidelity `√(1−ε²)` with `ρ`. Writing
//! `ρ' = V D^{1/2} X D^{1/2} V†` with `σ = V diag(μ) V†`, `D = 2^λ diag(μ)` turns the
//! constraints into `0 ⪯ X ⪯ I`, `⟨D, X⟩ ≤ 1`, and the fidelity `Tr √(B X B†)` is
//! concave in `X`. Projected gradient ascent either reaches the target (feasible,
//! with a witness) or a Lagrangian upper bound drops below it (infeasible). Runs that
//! do neither within the iteration budget are treated as infeasible, which only
//! makes the returned value more conservative; the certified lower end of the
//! bracket ignores them.

use faer::Mat;

use super::relent::{dmax_matrix, leak_tol, Support};
use super::{check_eps, relative_entropy, EntropyEstimate, Method};
use crate::error::Result;
use crate::linalg::{self, CMat, Eigh};
use crate::qstate::{fidelity, DensityMatrix, SUPPORT_REL};

#[derive(Clone, Debug)]
pub struct SmoothOptions {
    /// Bisection stops once the bracket is narrower than this (bits).
    pub width: f64,
    /// Inner projected-gradient iteration cap per bisection step.
    pub max_inner_iter: usize,
    /// How often (in inner iterations) the dual bound is evaluated.
    pub dual_every: usize,
}

impl Default for SmoothOptions {
    fn default() -> Self {
        Self { width: 1e-4, max_inner_iter: 3000, dual_every: 10 }
    }
}

const REG: f64 = 1e-14;
const ARMIJO: f64 = 1e-4;

enum Outcome {
    Feasible(CMat),
    Infeasible,
    Undecided,
}

/// Smallest `a'` with `√(a a') + √((1−a)(1−a')) ≥ √(1−ε²)`.
///
/// For a test `0 ⪯ W ⪯ I` with `Tr Wρ = a`, every `ρ'` in the ε-ball has `Tr Wρ' ≥ a'`.
pub fn min_partner_mass(a: f64, eps: f64) -> f64 {
    let a = a.clamp(0.0, 1.0);
    let target = (1.0 - eps * eps).max(0.0).sqrt();
    let f = |x: f64| (a * x).sqrt() + ((1.0 - a) * (1.0 - x)).max(0.0).sqrt();
    if f(0.0) >= target {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, a);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

pub fn smooth_dmax(rho: &DensityMatrix, sigma: &DensityMatrix, eps: f64) -> Result<EntropyEstimate> {
    smooth_dmax_with(rho, sigma, eps, &SmoothOptions::default())
}

pub fn smooth_dmax_with(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    eps: f64,
    opts: &SmoothOptions,
) -> Result<EntropyEstimate> {
    rho.check_same_layout(sigma)?;
    check_eps(eps)?;
    let tol = leak_tol(rho);
    let dm = dmax_matrix(rho.matrix(), sigma, tol)?;
    let estimate = |value: f64, lower: f64, cert: Option<DensityMatrix>, method| EntropyEstimate {
        value,
        epsilon: eps,
        method,
        certificate: cert,
        lower_bound: Some(lower),
    };
    if eps == 0.0 {
        return Ok(estimate(dm, dm, Some(rho.clone()), Method::ExactEigen));
    }
    let target = (1.0 - eps * eps).sqrt();
    if fidelity(rho, sigma)? >= target {
        return Ok(estimate(0.0, 0.0, Some(sigma.clone()), Method::BisectionFeasibility));
    }

    let mut problem = Problem::new(rho, sigma, opts)?;

    // a feasible upper end with its witness
    let (mut hi, mut best) = if dm.is_finite() {
        (dm, rho.matrix().clone())
    } else {
        let sup = Support::of(sigma)?;
        let pi = sup.eig.projector(&sup.idx);
        let proj = &pi * rho.matrix() * &pi;
        let t = linalg::trace(&proj).re;
        if t.sqrt() < target {
            return Ok(estimate(f64::INFINITY, f64::INFINITY, None, Method::BisectionFeasibility));
        }
        let proj = linalg::scale(&proj, 1.0 / t);
        (dmax_matrix(&proj, sigma, tol)?, proj)
    };
    // λ = 0 admits only ρ' = σ, already ruled out
    let mut lo = 0.0;
    let mut lo_certified = 0.0;

    let hint = relative_entropy(rho, sigma)?.value - 1.0;
    let mut probes: Vec<f64> = Vec::new();
    if hint.is_finite() && hint > lo && hint < hi {
        probes.push(hint);
    }
    loop {
        let mid = match probes.pop() {
            Some(p) => p,
            None => {
                if hi - lo <= opts.width {
                    break;
                }
                0.5 * (lo + hi)
            }
        };
        match problem.solve(mid, target) {
            Outcome::Feasible(cert) => {
                hi = mid;
                best = cert;
            }
            Outcome::Infeasible => {
                lo = mid;
                lo_certified = mid;
            }
            Outcome::Undecided => lo = mid,
        }
    }
    let cert = DensityMatrix::from_parts(rho.layout().clone(), linalg::hermitian_part(&best), rho.tolerance());
    let value = dmax_matrix(cert.matrix(), sigma, tol)?.min(hi).max(0.0);
    Ok(estimate(value, lo_certified.min(value), Some(cert), Method::BisectionFeasibility))
}

/// Mixes a sub-normalized `ρ' ⪯ cσ` with `cσ` up to unit trace.
fn normalize_with_reference(rho_p: &CMat, sigma: &CMat, c: f64) -> CMat {
    let t = linalg::trace(rho_p).re;
    if t >= 1.0 || c <= t {
        return linalg::scale(rho_p, 1.0 / t.max(1e-300));
    }
    let s = (1.0 - t) / (c - t);
    linalg::lincomb(rho_p, 1.0 - s, sigma, s * c)
}

enum Problem {
    /// Commuting pair in the basis `basis` (identity when `None`).
    Classical {
        p: Vec<f64>,
        q: Vec<f64>,
        basis: Option<CMat>,
        sigma: CMat,
        opts: SmoothOptions,
    },
    Dense(DenseProblem),
}

impl Problem {
    fn new(rho: &DensityMatrix, sigma: &DensityMatrix, opts: &SmoothOptions) -> Result<Self> {
        if rho.is_diagonal() && sigma.is_diagonal() {
            return Ok(Problem::Classical {
                p: rho.diagonal_probs(),
                q: sigma.diagonal_probs(),
                basis: None,
                sigma: sigma.matrix().clone(),
                opts: opts.clone(),
            });
        }
        let comm = linalg::sub(&(rho.matrix() * sigma.matrix()), &(sigma.matrix() * rho.matrix()));
        if linalg::max_abs(&comm) <= 1e-12 {
            // a generic combination separates the joint eigenspaces
            let mix = linalg::lincomb(rho.matrix(), 1.0, sigma.matrix(), 0.754_877_666_246_692_8);
            let v = linalg::eigh(&mix)?.vectors;
            let pr = v.adjoint() * rho.matrix() * &v;
            let ps = v.adjoint() * sigma.matrix() * &v;
            let off = |m: &CMat| {
                let mut acc: f64 = 0.0;
                for j in 0..m.ncols() {
                    for i in 0..m.nrows() {
                        if i != j {
                            acc = acc.max(m[(i, j)].norm());
                        }
                    }
                }
                acc
            };
            if off(&pr) <= 1e-10 && off(&ps) <= 1e-10 {
                let d = pr.nrows();
                return Ok(Problem::Classical {
                    p: (0..d).map(|i| pr[(i, i)].re.max(0.0)).collect(),
                    q: (0..d).map(|i| ps[(i, i)].re.max(0.0)).collect(),
                    basis: Some(v),
                    sigma: sigma.matrix().clone(),
                    opts: opts.clone(),
                });
            }
        }
        Ok(Problem::Dense(DenseProblem::new(rho, sigma, opts)?))
    }

    fn solve(&mut self, lambda: f64, target: f64) -> Outcome {
        match self {
            Problem::Classical { p, q, basis, sigma, opts } => match solve_classical(p, q, lambda, target, opts) {
                Some(Some(x)) => {
                    let diag = linalg::diag_real(&x);
                    let m = match basis {
                        Some(v) => &*v * &diag * v.adjoint(),
                        None => diag,
                    };
                    Outcome::Feasible(normalize_with_reference(&m, sigma, lambda.exp2()))
                }
                Some(None) => Outcome::Infeasible,
                None => Outcome::Undecided,
            },
            Problem::Dense(d) => d.solve(lambda, target),
        }
    }
}

/// `Some(Some(x))` feasible with witness distribution, `Some(None)` infeasible,
/// `None` undecided.
fn solve_classical(p: &[f64], q: &[f64], lambda: f64, target: f64, opts: &SmoothOptions) -> Option<Option<Vec<f64>>> {
    let scale = lambda.exp2();
    let qmax = q.iter().copied().fold(0.0, f64::max);
    let idx: Vec<usize> = (0..q.len()).filter(|&i| q[i] > SUPPORT_REL * qmax).collect();
    let dw: Vec<f64> = idx.iter().map(|&i| scale * q[i]).collect();
    let a: Vec<f64> = idx.iter().zip(&dw).map(|(&i, &d)| (p[i].max(0.0) * d).sqrt()).collect();
    let n = idx.len();
    let value = |x: &[f64]| -> f64 { a.iter().zip(x).map(|(ai, xi)| ai * xi.max(0.0).sqrt()).sum() };
    let grad = |x: &[f64]| -> Vec<f64> { a.iter().zip(x).map(|(ai, xi)| ai / (2.0 * (xi + REG).sqrt())).collect() };
    let project = |y: &[f64]| -> Vec<f64> {
        let clip = |t: f64| -> Vec<f64> { y.iter().zip(&dw).map(|(yi, di)| (yi - t * di).clamp(0.0, 1.0)).collect() };
        let mass = |x: &[f64]| -> f64 { x.iter().zip(&dw).map(|(xi, di)| xi * di).sum() };
        let x0 = clip(0.0);
        if mass(&x0) <= 1.0 {
            return x0;
        }
        let mut hi = 1.0;
        while mass(&clip(hi)) > 1.0 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mass(&clip(mid)) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        clip(hi)
    };
    // Lagrangian bound on the best attainable fidelity
    let upper = |x: &[f64], g: &[f64]| -> f64 {
        let reg: f64 = a.iter().zip(x).map(|(ai, xi)| ai * (xi + REG).sqrt()).sum();
        let gx: f64 = g.iter().zip(x).map(|(gi, xi)| gi * xi).sum();
        let mut br: Vec<(f64, f64, f64)> = g.iter().zip(&dw).map(|(&gi, &di)| (gi / di, gi, di)).collect();
        br.sort_by(|u, v| v.0.total_cmp(&u.0));
        // h(ν) = ν + Σ max(0, G_i − ν D_i) is convex piecewise linear; its minimum
        // over ν ≥ 0 sits at a breakpoint or at 0
        let mut best = f64::INFINITY;
        let (mut sg, mut sd) = (0.0, 0.0);
        for &(nu, gi, di) in &br {
            let nu = nu.max(0.0);
            best = best.min(nu + sg - nu * sd);
            sg += gi;
            sd += di;
        }
        best = best.min(sg);
        reg - gx + best
    };
    let mut x: Vec<f64> = vec![1.0 / scale; n];
    let mut eta = 1.0;
    for it in 0..opts.max_inner_iter {
        let f = value(&x);
        if f >= target {
            let mut full = vec![0.0; q.len()];
            for (k, &i) in idx.iter().enumerate() {
                full[i] = x[k] * dw[k];
            }
            return Some(Some(full));
        }
        let g = grad(&x);
        if it % opts.dual_every == 0 && upper(&x, &g) < target {
            return Some(None);
        }
        let mut moved = false;
        while eta > 1e-16 {
            let y = project(&x.iter().zip(&g).map(|(xi, gi)| xi + eta * gi).collect::<Vec<_>>());
            let lin: f64 = g.iter().zip(y.iter().zip(&x)).map(|(gi, (yi, xi))| gi * (yi - xi)).sum();
            if lin <= 1e-18 {
                break;
            }
            if value(&y) >= f + ARMIJO * lin {
                x = y;
                eta *= 2.0;
                moved = true;
                break;
            }
            eta *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let g = grad(&x);
    if upper(&x, &g) < target {
        return Some(None);
    }
    None
}

struct DenseProblem {
    /// `√Λ_ρ U_ρ† V_σ diag(√μ)` restricted to both supports.
    b0: CMat,
    mu: Vec<f64>,
    v_sigma: CMat,
    sigma: CMat,
    opts: SmoothOptions,
}

struct Eval {
    f: f64,
    upper_part: f64,
    grad: CMat,
}

impl DenseProblem {
    fn new(rho: &DensityMatrix, sigma: &DensityMatrix, opts: &SmoothOptions) -> Result<Self> {
        let er = rho.eigh()?;
        let ridx = er.support_indices(er.support_threshold(SUPPORT_REL));
        let sup = Support::of(sigma)?;
        let u = er.columns(&ridx);
        let v = sup.eig.columns(&sup.idx);
        let mu: Vec<f64> = sup.idx.iter().map(|&k| sup.eig.values[k]).collect();
        let mut b0 = u.adjoint() * &v;
        for i in 0..ridx.len() {
            let s = er.values[ridx[i]].max(0.0).sqrt();
            for j in 0..mu.len() {
                b0[(i, j)] *= s * mu[j].sqrt();
            }
        }
        Ok(Self { b0, mu, v_sigma: v, sigma: sigma.matrix().clone(), opts: opts.clone() })
    }

    fn value(&self, b: &CMat, x: &CMat) -> f64 {
        let a = b * x * b.adjoint();
        linalg::eigvalsh(&a).map(|ev| ev.iter().map(|&v| v.max(0.0).sqrt()).sum()).unwrap_or(0.0)
    }

    fn eval(&self, b: &CMat, x: &CMat) -> Option<Eval> {
        let a = b * x * b.adjoint();
        let e = linalg::eigh(&a).ok()?;
        let f = e.values.iter().map(|&v| v.max(0.0).sqrt()).sum();
        let reg: f64 = e.values.iter().map(|&v| (v.max(0.0) + REG).sqrt()).sum();
        let inv_sqrt = e.apply(|v| 1.0 / (v.max(0.0) + REG).sqrt());
        let grad = linalg::scale(&(b.adjoint() * &inv_sqrt * b), 0.5);
        let gx = linalg::inner_re(&grad, x);
        Some(Eval { f, upper_part: reg - gx, grad: linalg::hermitian_part(&grad) })
    }

    /// `min_ν≥0 ν + Σ eig₊(G − ν D)`.
    fn dual(&self, g: &CMat, d: &[f64]) -> f64 {
        let r = d.len();
        let h = |nu: f64| -> f64 {
            let m = Mat::from_fn(r, r, |i, j| if i == j { g[(i, j)] - linalg::re(nu * d[i]) } else { g[(i, j)] });
            nu + linalg::eigvalsh(&m).map(|ev| ev.iter().map(|v| v.max(0.0)).sum()).unwrap_or(f64::INFINITY)
        };
        let gmax = linalg::eigvalsh(g).map(|ev| ev.last().copied().unwrap_or(0.0)).unwrap_or(0.0);
        let dmin = d.iter().copied().fold(f64::INFINITY, f64::min);
        let (mut a, mut b) = (0.0, (gmax / dmin).max(0.0));
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - phi * (b - a);
        let mut e = a + phi * (b - a);
        let (mut hc, mut he) = (h(c), h(e));
        for _ in 0..80 {
            if hc < he {
                b = e;
                e = c;
                he = hc;
                c = b - phi * (b - a);
                hc = h(c);
            } else {
                a = c;
                c = e;
                hc = he;
                e = a + phi * (b - a);
                he = h(e);
            }
        }
        hc.min(he).min(h(0.0)).min(h(b))
    }

    /// Projection onto `{0 ⪯ X ⪯ I, ⟨D, X⟩ ≤ 1}` by Dykstra's alternating scheme.
    fn project(&self, y: &CMat, d: &[f64]) -> CMat {
        let r = d.len();
        let dn2: f64 = d.iter().map(|v| v * v).sum();
        let box_proj = |m: &CMat| -> CMat {
            match linalg::eigh(m) {
                Ok(e) => Eigh { values: e.values.iter().map(|v| v.clamp(0.0, 1.0)).collect(), vectors: e.vectors }
                    .apply(|v| v),
                Err(_) => m.clone(),
            }
        };
        let half_proj = |m: &CMat| -> CMat {
            let s: f64 = (0..r).map(|i| d[i] * m[(i, i)].re).sum();
            if s <= 1.0 {
                return m.clone();
            }
            let t = (s - 1.0) / dn2;
            let mut out = m.clone();
            for i in 0..r {
                out[(i, i)] -= linalg::re(t * d[i]);
            }
            out
        };
        let mut x = y.clone();
        let mut p = linalg::zeros(r, r);
        let mut q = linalg::zeros(r, r);
        for _ in 0..500 {
            let z = box_proj(&linalg::add(&x, &p));
            p = linalg::sub(&linalg::add(&x, &p), &z);
            let xn = half_proj(&linalg::add(&z, &q));
            q = linalg::sub(&linalg::add(&z, &q), &xn);
            let change = linalg::max_abs_diff(&xn, &x);
            x = xn;
            if change < 1e-14 {
                break;
            }
        }
        // final pass into the box keeps X ⪯ I exactly; the half-space slack is
        // absorbed by normalization
        let xb = box_proj(&x);
        let s: f64 = (0..r).map(|i| d[i] * xb[(i, i)].re).sum();
        if s > 1.0 {
            linalg::scale(&xb, 1.0 / s)
        } else {
            xb
        }
    }

    fn witness(&self, x: &CMat, lambda: f64) -> CMat {
        let c = lambda.exp2();
        let r = self.mu.len();
        let mut xs = x.clone();
        for j in 0..r {
            for i in 0..r {
                xs[(i, j)] *= c * (self.mu[i] * self.mu[j]).sqrt();
            }
        }
        let rho_p = &self.v_sigma * &xs * self.v_sigma.adjoint();
        normalize_with_reference(&linalg::hermitian_part(&rho_p), &self.sigma, c)
    }

    fn solve(&mut self, lambda: f64, target: f64) -> Outcome {
        let c = lambda.exp2();
        let r = self.mu.len();
        let b = linalg::scale(&self.b0, c.sqrt());
        let d: Vec<f64> = self.mu.iter().map(|m| c * m).collect();
        let mut x = linalg::scale(&linalg::identity(r), 1.0 / c);
        let mut eta = 1.0;
        for it in 0..self.opts.max_inner_iter {
            let Some(ev) = self.eval(&b, &x) else { return Outcome::Undecided };
            if ev.f >= target {
                return Outcome::Feasible(self.witness(&x, lambda));
            }
            if it % self.opts.dual_every == 0 && ev.upper_part + self.dual(&ev.grad, &d) < target {
                return Outcome::Infeasible;
            }
            let mut moved = false;
            while eta > 1e-16 {
                let y = self.project(&linalg::lincomb(&x, 1.0, &ev.grad, eta), &d);
                let lin = linalg::inner_re(&ev.grad, &linalg::sub(&y, &x));
                if lin <= 1e-18 {
                    break;
                }
                if self.value(&b, &y) >= ev.f + ARMIJO * lin {
                    x = y;
                    eta *= 2.0;
                    moved = true;
                    break;
                }
                eta *= 0.5;
            }
            if !moved {
                break;
            }
        }
        match self.eval(&b, &x) {
            Some(ev) if ev.f >= target => Outcome::Feasible(self.witness(&x, lambda)),
            Some(ev) if ev.upper_part + self.dual(&ev.grad, &d) < target => Outcome::Infeasible,
            _ => Outcome::Undecided,
        }
    }
}
