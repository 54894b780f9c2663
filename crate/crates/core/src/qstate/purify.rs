use faer::Mat;

use super::density::{DensityMatrix, SUPPORT_REL};
use super::distance::fidelity;
use super::layout::RegisterLayout;
use crate::error::{Error, Result};
use crate::linalg::{self, re, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AncillaSize {
    /// Ancilla as large as the purified system.
    #[default]
    Full,
    /// Ancilla dimension equal to the rank.
    Rank,
}

/// Purification on `layout ⊗ ancilla` with a full-size ancilla.
pub fn purify(state: &DensityMatrix, ancilla_label: &str) -> Result<DensityMatrix> {
    purify_with(state, ancilla_label, AncillaSize::Full)
}

pub fn purify_with(state: &DensityMatrix, ancilla_label: &str, size: AncillaSize) -> Result<DensityMatrix> {
    let (layout, v) = purification_vector(state, ancilla_label, size)?;
    Ok(DensityMatrix::from_parts(layout, linalg::outer(&v), state.tolerance()))
}

/// `Σ_k √λ_k |v_k⟩|k⟩` over the support of `state`.
pub fn purification_vector(
    state: &DensityMatrix,
    ancilla_label: &str,
    size: AncillaSize,
) -> Result<(RegisterLayout, Vec<C64>)> {
    let e = state.eigh()?;
    let thr = e.support_threshold(SUPPORT_REL);
    let idx: Vec<usize> = e.support_indices(thr).into_iter().rev().collect();
    let d = state.dim();
    let da = match size {
        AncillaSize::Full => d,
        AncillaSize::Rank => idx.len().max(1),
    };
    let layout = state.layout().concat(&RegisterLayout::single(ancilla_label, da)?)?;
    let total: f64 = idx.iter().map(|&k| e.values[k]).sum();
    let mut v = vec![C64::new(0.0, 0.0); d * da];
    for (a, &k) in idx.iter().enumerate() {
        let w = (e.values[k] / total).sqrt();
        for i in 0..d {
            v[i * da + a] = e.vectors[(i, k)] * w;
        }
    }
    Ok((layout, v))
}

/// State vector of a rank-one density matrix (global phase arbitrary).
pub fn state_vector(state: &DensityMatrix) -> Result<Vec<C64>> {
    let e = state.eigh()?;
    let top = e.max();
    if (top - 1.0).abs() > 1e-6_f64.max(state.tolerance()) {
        return Err(Error::InvalidState(format!("state is not pure (largest eigenvalue {top})")));
    }
    let k = e.dim() - 1;
    Ok((0..e.dim()).map(|i| e.vectors[(i, k)]).collect())
}

/// Purification of `theta_a` closest to the pure state `rho_pure_ab`.
///
/// The `A` registers are those of `theta_a`; everything else in `rho_pure_ab`
/// plays the purifying system.
pub fn uhlmann_partner(rho_pure_ab: &DensityMatrix, theta_a: &DensityMatrix) -> Result<DensityMatrix> {
    let la = theta_a.layout();
    for r in la.factors() {
        let p = rho_pure_ab.layout().require(&r.label)?;
        if rho_pure_ab.layout().factors()[p].dim != r.dim {
            return Err(Error::LayoutMismatch { left: rho_pure_ab.layout().to_string(), right: la.to_string() });
        }
    }
    let a_labels = la.labels();
    let lb = rho_pure_ab.layout().without(&a_labels)?;
    let order: Vec<&str> = a_labels.iter().copied().chain(lb.labels()).collect();
    let ordered = rho_pure_ab.permute(&order)?;
    let psi = state_vector(&ordered)?;
    let (da, db) = (la.dim(), lb.dim());

    let e = theta_a.eigh()?;
    let idx = e.support_indices(e.support_threshold(SUPPORT_REL));
    let r = idx.len();
    if r > db {
        return Err(Error::AncillaTooSmall { needed: r, have: db });
    }
    let s = e.columns(&idx);
    let sqrt_l: Vec<f64> = idx.iter().map(|&k| e.values[k].max(0.0).sqrt()).collect();
    let mut s_scaled = s.clone();
    for c in 0..r {
        for i in 0..da {
            s_scaled[(i, c)] *= sqrt_l[c];
        }
    }
    // R[a, b] = ψ[a, b]; X = R† S √Λ
    let rmat = Mat::from_fn(da, db, |a, b| psi[a * db + b]);
    let x = rmat.adjoint() * &s_scaled;
    let svd = x.thin_svd().map_err(|e| Error::Numerical(format!("svd failed: {e:?}")))?;
    let theta = &s_scaled * svd.V() * svd.U().adjoint();
    let mut v = vec![C64::new(0.0, 0.0); da * db];
    for a in 0..da {
        for b in 0..db {
            v[a * db + b] = theta[(a, b)];
        }
    }
    let n = linalg::norm_sqr(&v).sqrt();
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
    let out = DensityMatrix::from_parts(ordered.layout().clone(), linalg::outer(&v), rho_pure_ab.tolerance());
    out.permute(&rho_pure_ab.layout().labels())
}

fn fresh_label(layout: &RegisterLayout, stem: &str) -> String {
    let mut k = 0;
    loop {
        let l = format!("{stem}{k}");
        if !layout.contains(&l) {
            return l;
        }
        k += 1;
    }
}

/// Classical-quantum extension of `sigma_a` matched to `rho_ab`, classical on `classical`.
///
/// Purify `rho_ab`, align a purification of `sigma_a` to it, trace the purifying
/// system, dephase `classical`, and restrict to the support of `rho`'s classical marginal.
pub fn cq_extension(rho_ab: &DensityMatrix, sigma_a: &DensityMatrix, classical: &str) -> Result<DensityMatrix> {
    let lay = rho_ab.layout();
    let bpos = lay.require(classical)?;
    let a_labels = sigma_a.layout().labels();
    if a_labels.contains(&classical) {
        return Err(Error::layout(format!("`{classical}` cannot be both quantum and classical")));
    }
    let expected = lay.without(&[classical])?;
    let mismatch = || Error::LayoutMismatch { left: expected.to_string(), right: sigma_a.layout().to_string() };
    if expected.len() != a_labels.len() {
        return Err(mismatch());
    }
    let sigma_a = &sigma_a.permute(&expected.labels()).map_err(|_| mismatch())?;
    if *sigma_a.layout() != expected {
        return Err(mismatch());
    }
    let a_labels = expected.labels();
    let mass = rho_ab.off_block_mass(classical)?;
    if mass > rho_ab.tolerance() {
        return Err(Error::NotClassical { label: classical.to_string(), mass });
    }
    let rho_a = rho_ab.reduced(&a_labels)?.permute(&a_labels)?;
    let rho_b = rho_ab.reduced(&[classical])?;
    let pb = rho_b.diagonal_probs();
    let pmax = pb.iter().copied().fold(0.0, f64::max);
    let in_support: Vec<bool> = pb.iter().map(|&p| p > SUPPORT_REL * pmax).collect();

    if fidelity(&rho_a, sigma_a)? < 1e-12 {
        let sb = DensityMatrix::diagonal(rho_b.layout().clone(), &pb)?;
        return sigma_a.tensor(&sb)?.permute(&lay.labels());
    }

    let anc = fresh_label(lay, "anc");
    let psi = purify(rho_ab, &anc)?;
    let partner = uhlmann_partner(&psi, sigma_a)?;
    let ext = partner.partial_trace(&[&anc])?.pinch(&[classical])?;

    let d = ext.dim();
    let digit: Vec<usize> = (0..d).map(|i| lay.decode(i)[bpos]).collect();
    let mut m = ext.matrix().clone();
    for j in 0..d {
        for i in 0..d {
            if !in_support[digit[i]] || !in_support[digit[j]] {
                m[(i, j)] = re(0.0);
            }
        }
    }
    let tr = linalg::trace(&m).re;
    if !(tr > 0.0) {
        return Err(Error::Numerical("extension vanished on the classical support".into()));
    }
    let m = linalg::scale(&m, 1.0 / tr);
    Ok(DensityMatrix::from_parts(lay.clone(), m, rho_ab.tolerance()))
}
