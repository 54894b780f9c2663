use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::free_sets::FreeSet;
use crate::qstate::{trace_distance, DensityMatrix};

/// Largest trace distance for which the bound applies.
pub const MAX_TRACE_DISTANCE: f64 = 1.0 / 3.0;

/// `ε(log₂ d + inf_{τ∈F}‖log₂ τ‖_∞) + ε log₂(1/ε) + 4ε` with `ε = ‖ρ − ρ'‖₁`.
pub fn continuity_bound(rho: &DensityMatrix, rho_prime: &DensityMatrix, free_set: &FreeSet) -> Result<f64> {
    let eps = trace_distance(rho, rho_prime)?;
    if eps > MAX_TRACE_DISTANCE + rho.tolerance() {
        return Err(Error::domain(format!("trace distance {eps} exceeds 1/3")));
    }
    if eps < 1e-15 {
        return Ok(0.0);
    }
    let log_d = (rho.dim() as f64).log2();
    let c = free_set.inf_log_norm(rho.layout())?;
    Ok(eps * (log_d + c) + eps * (1.0 / eps).log2() + 4.0 * eps)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ContinuityCheck {
    pub trace_distance: f64,
    /// `|E(ρ) − E(ρ')|`
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// Compares the change of the relative entropy of resource with the bound.
pub fn continuity_check(rho: &DensityMatrix, rho_prime: &DensityMatrix, free_set: &FreeSet) -> Result<ContinuityCheck> {
    let rhs = continuity_bound(rho, rho_prime, free_set)?;
    let e1 = free_set.closest_free_relent(rho)?.1.value;
    let e2 = free_set.closest_free_relent(rho_prime)?.1.value;
    let lhs = (e1 - e2).abs();
    Ok(ContinuityCheck { trace_distance: trace_distance(rho, rho_prime)?, lhs, rhs, ok: lhs <= rhs + 1e-6 })
}
