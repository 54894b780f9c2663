use faer::Mat;

use crate::error::Result;
use crate::linalg::{self, CMat, C64};
use crate::qstate::{partial_transpose_matrix, RegisterLayout};

const DYKSTRA_ITER: usize = 500;
const DYKSTRA_TOL: f64 = 1e-11;

/// Nearest PPT state to Hermitian `h`, by Dykstra alternation between the state
/// set and the set of matrices with positive partial transpose.
///
/// The last iterate is mixed with `I/d` just enough to make the partial transpose
/// positive, so the result is a member and not merely close to one.
pub(crate) fn project_ppt(layout: &RegisterLayout, h: &CMat, a: &[&str]) -> Result<CMat> {
    let d = h.nrows();
    let pt = |m: &CMat| partial_transpose_matrix(layout, m, a);
    let mut x = h.clone();
    let mut p = linalg::zeros(d, d);
    let mut q = linalg::zeros(d, d);
    let mut y = x.clone();
    for _ in 0..DYKSTRA_ITER {
        y = linalg::project_density(&linalg::add(&x, &p))?;
        p = linalg::sub(&linalg::add(&x, &p), &y);
        let z = linalg::add(&y, &q);
        let clipped = linalg::eigh(&pt(&z)?)?.apply(|v| v.max(0.0));
        let x_new = pt(&clipped)?;
        q = linalg::sub(&z, &x_new);
        let moved = linalg::max_abs_diff(&x_new, &x);
        x = x_new;
        if moved < DYKSTRA_TOL && linalg::max_abs_diff(&x, &y) < 1e-9 {
            break;
        }
    }
    let y = linalg::project_density(&linalg::hermitian_part(&y))?;
    let e = -linalg::eigvalsh(&pt(&y)?)?.first().copied().unwrap_or(0.0);
    if e <= 0.0 {
        return Ok(y);
    }
    let s = e / (e + 1.0 / d as f64);
    Ok(linalg::lincomb(&y, 1.0 - s, &linalg::identity(d), s / d as f64))
}

const SUPPORT_ITER: usize = 60;

/// Upper bound on `max Tr Wσ` over PPT states.
///
/// Every `R ⪰ 0` gives `Tr Wσ ≤ λmax(W + R^Γ)` because `Tr R^Γσ = Tr Rσ^Γ ≥ 0`.
/// The bound is minimized over `R` by projected subgradient steps on a
/// softmax of the spectrum, starting from both `R = 0` and `R = tI − W^Γ`.
pub(crate) fn ppt_support_bound(layout: &RegisterLayout, w: &CMat, a: &[&str]) -> Result<f64> {
    let d = w.nrows();
    let pt = |m: &CMat| partial_transpose_matrix(layout, m, a);
    let wg = pt(w)?;
    let eg = linalg::eigh(&wg)?;
    let ew = linalg::eigh(w)?;
    let mut best = ew.max().min(eg.max());
    let spread = (ew.max() - ew.min()).max(1e-300);
    let starts = [linalg::zeros(d, d), eg.apply(|v| eg.max() - v)];
    for start in starts {
        let mut r = start;
        for it in 0..SUPPORT_ITER {
            let m = linalg::add(w, &pt(&r)?);
            let e = linalg::eigh(&m)?;
            let top = e.max();
            best = best.min(top);
            let temp = spread * 1e-3;
            let weights = e.apply(|v| ((v - top) / temp).exp());
            let norm = linalg::trace(&weights).re;
            let g = pt(&linalg::scale(&weights, 1.0 / norm))?;
            let eta = spread / (4.0 * ((it + 1) as f64).sqrt());
            let stepped = linalg::lincomb(&r, 1.0, &g, -eta);
            r = linalg::eigh(&stepped)?.apply(|v| v.max(0.0));
        }
    }
    Ok(best)
}

const REFINE_BISECT: usize = 30;
const REFINE_SWEEPS: usize = 150;

/// Tighter version of [`ppt_support_bound`] for one-off certificates.
///
/// For a trial level `t`, alternating projections look for `R ⪰ 0` with
/// `R^Γ ⪯ tI − W`; whatever `R` comes out is clipped to the cone and scored by
/// `λmax(W + R^Γ)`, so the result is valid even when a sweep has not converged.
/// `floor` is a known lower value, such as `Tr Wσ` for a member `σ`.
pub(crate) fn ppt_support_bound_refined(layout: &RegisterLayout, w: &CMat, a: &[&str], floor: f64) -> Result<f64> {
    let d = w.nrows();
    let pt = |m: &CMat| partial_transpose_matrix(layout, m, a);
    let score = |r: &CMat| -> Result<f64> { Ok(linalg::eigh(&linalg::add(w, &pt(r)?))?.max()) };
    let mut best = ppt_support_bound(layout, w, a)?;
    let (mut lo, mut hi) = (floor.min(best), best);
    let mut r = linalg::zeros(d, d);
    for _ in 0..REFINE_BISECT {
        if hi - lo < 1e-10 * (1.0 + hi.abs()) {
            break;
        }
        let t = 0.5 * (lo + hi);
        let cap = linalg::lincomb(&linalg::identity(d), t, w, -1.0);
        let mut p = linalg::zeros(d, d);
        let mut q = linalg::zeros(d, d);
        for _ in 0..REFINE_SWEEPS {
            let y = linalg::eigh(&linalg::add(&r, &p))?.apply(|v| v.max(0.0));
            p = linalg::sub(&linalg::add(&r, &p), &y);
            // nearest Z with Z^Γ ⪯ cap; Γ preserves the Frobenius norm
            let z = linalg::add(&y, &q);
            let slack = linalg::sub(&cap, &pt(&z)?);
            let fixed = linalg::sub(&cap, &linalg::eigh(&slack)?.apply(|v| v.max(0.0)));
            let r_new = pt(&fixed)?;
            q = linalg::sub(&z, &r_new);
            r = r_new;
        }
        let clipped = linalg::eigh(&r)?.apply(|v| v.max(0.0));
        let value = score(&clipped)?;
        best = best.min(value);
        if value <= t + 1e-9 * (1.0 + t.abs()) {
            hi = value.min(hi);
        } else {
            lo = t;
        }
        r = clipped;
    }
    Ok(best)
}

fn bloch(theta: f64, phi: f64) -> [C64; 2] {
    [C64::new((theta / 2.0).cos(), 0.0), C64::from_polar((theta / 2.0).sin(), phi)]
}

/// `(⟨a| ⊗ I) W (|a⟩ ⊗ I)` for `a` on the first factor, or on the second when `second`.
fn compress(w: &CMat, a: &[C64], da: usize, db: usize, second: bool) -> CMat {
    if !second {
        Mat::from_fn(db, db, |k, l| {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..da {
                for j in 0..da {
                    acc += a[i].conj() * w[(i * db + k, j * db + l)] * a[j];
                }
            }
            acc
        })
    } else {
        Mat::from_fn(da, da, |i, j| {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..db {
                for l in 0..db {
                    acc += a[k].conj() * w[(i * db + k, j * db + l)] * a[l];
                }
            }
            acc
        })
    }
}

fn top(m: &CMat) -> Result<(f64, Vec<C64>)> {
    let e = linalg::eigh(m)?;
    let n = e.dim();
    Ok((e.max(), (0..n).map(|i| e.vectors[(i, n - 1)]).collect()))
}

/// `max ⟨a b| W |a b⟩` over unit product vectors, for `W` in A-then-B order with
/// one party a qubit: a Bloch-sphere grid on the qubit followed by seesaw refinement.
pub(crate) fn max_product_expectation(w: &CMat, da: usize, db: usize) -> Result<f64> {
    let qubit_second = da != 2;
    let (nt, np) = (48, 96);
    let mut scored: Vec<(f64, [C64; 2])> = Vec::with_capacity(nt * np);
    for it in 0..=nt {
        let theta = std::f64::consts::PI * it as f64 / nt as f64;
        let nphi = if it == 0 || it == nt { 1 } else { np };
        for ip in 0..nphi {
            let phi = 2.0 * std::f64::consts::PI * ip as f64 / np as f64;
            let a = bloch(theta, phi);
            let (v, _) = top(&compress(w, &a, da, db, qubit_second))?;
            scored.push((v, a));
        }
    }
    scored.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut best = scored[0].0;
    for (_, start) in scored.iter().take(6) {
        let mut a = start.to_vec();
        let mut last = f64::NEG_INFINITY;
        for _ in 0..200 {
            let (_, b) = top(&compress(w, &a, da, db, qubit_second))?;
            let (v, a_new) = top(&compress(w, &b, da, db, !qubit_second))?;
            a = a_new;
            if v - last < 1e-15 {
                last = last.max(v);
                break;
            }
            last = v;
        }
        best = best.max(last);
    }
    Ok(best)
}
