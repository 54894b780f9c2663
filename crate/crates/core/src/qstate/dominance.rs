use super::density::{DensityMatrix, SUPPORT_REL};
use super::ops::reorder_matrix;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Smallest eigenvalue of `factor·bound − theta`.
pub fn dominance_margin(theta: &DensityMatrix, bound: &CMat, factor: f64) -> Result<f64> {
    let d = theta.dim();
    if bound.nrows() != d || bound.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: bound.nrows() });
    }
    let diff = linalg::lincomb(bound, factor, theta.matrix(), -1.0);
    Ok(linalg::eigvalsh(&diff)?.first().copied().unwrap_or(0.0))
}

/// Whether `theta ⪯ factor·bound` within the state's tolerance.
pub fn dominance_check(theta: &DensityMatrix, bound: &CMat, factor: f64) -> Result<bool> {
    Ok(dominance_margin(theta, bound, factor)? >= -theta.tolerance())
}

/// `Θ_A ⊗ Π_B` in `theta`'s register order, with `Π_B` the support projector of `Θ_B`.
pub fn marginal_support_bound(theta: &DensityMatrix, b_labels: &[&str]) -> Result<CMat> {
    let lay = theta.layout();
    let a = theta.partial_trace(b_labels)?;
    let b = theta.reduced(b_labels)?;
    let e = b.eigh()?;
    let pi = e.projector(&e.support_indices(e.support_threshold(SUPPORT_REL)));
    let prod = linalg::kron(a.matrix(), &pi);
    let joint = a.layout().concat(b.layout())?;
    reorder_matrix(&joint, &prod, lay)
}
