use super::{gaussian_cdf_inv, relative_entropy, relative_entropy_variance, EntropyEstimate, Method};
use crate::error::{Error, Result};
use crate::qstate::DensityMatrix;

/// `n D(ρ‖σ) + √(n V(ρ‖σ)) Φ^{-1}(ε)`, without the logarithmic remainder.
pub fn second_order_dmax(rho: &DensityMatrix, sigma: &DensityMatrix, n: usize, eps: f64) -> Result<EntropyEstimate> {
    if n == 0 {
        return Err(Error::domain("block length must be at least 1"));
    }
    let q = gaussian_cdf_inv(eps)?;
    let d = relative_entropy(rho, sigma)?.value;
    if d.is_infinite() {
        return Err(Error::SupportViolation("supp(rho) is not inside supp(sigma)".into()));
    }
    let v = relative_entropy_variance(rho, sigma)?.value;
    let n = n as f64;
    Ok(EntropyEstimate {
        value: n * d + (n * v).sqrt() * q,
        epsilon: eps,
        method: Method::SecondOrderExpansion,
        certificate: None,
        lower_bound: None,
    })
}
