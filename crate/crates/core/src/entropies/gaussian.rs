use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

fn standard() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal parameters are valid")
}

/// `Φ(x)`, the standard normal distribution function.
pub fn gaussian_cdf(x: f64) -> f64 {
    standard().cdf(x)
}

/// `Φ^{-1}(ε)` for `ε ∈ (0, 1)`.
pub fn gaussian_cdf_inv(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain(format!("quantile level {eps} outside (0, 1)")));
    }
    if eps == 0.5 {
        return Ok(0.0);
    }
    if eps > 0.5 {
        return Ok(-gaussian_cdf_inv(1.0 - eps)?);
    }
    Ok(standard().inverse_cdf(eps))
}

/// `2 √(log₂(1/(2ε)))` for `ε ∈ (0, 1/2]`.
pub fn fact8_bound(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::domain(format!("bound needs 0 < eps <= 1/2, got {eps}")));
    }
    Ok(2.0 * (1.0 / (2.0 * eps)).log2().max(0.0).sqrt())
}
