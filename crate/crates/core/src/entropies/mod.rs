//! Entropic quantities in bits.

mod classical;
mod continuity;
mod gaussian;
mod relent;
mod second_order;
mod smooth;

use serde::{Deserialize, Serialize};

use crate::qstate::DensityMatrix;

pub use classical::{iid_classes, smooth_dmax_classical_oracle, MAX_ORACLE_SUPPORT};
pub use continuity::{continuity_bound, continuity_check, ContinuityCheck, MAX_TRACE_DISTANCE};
pub use gaussian::{fact8_bound, gaussian_cdf, gaussian_cdf_inv};
pub use relent::{dmax, relative_entropy, relative_entropy_variance};
pub use second_order::second_order_dmax;
pub use smooth::{min_partner_mass, smooth_dmax, smooth_dmax_with, SmoothOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactEigen,
    BisectionFeasibility,
    ClassicalBruteforce,
    SecondOrderExpansion,
    /// Iterative minimization over a free set.
    Optimizer,
}

/// A value in bits with its provenance.
#[derive(Clone, Debug)]
pub struct EntropyEstimate {
    pub value: f64,
    pub epsilon: f64,
    pub method: Method,
    /// A witness state inside the smoothing ball, when the method produces one.
    pub certificate: Option<DensityMatrix>,
    /// Certified lower end of the bracket, when known.
    pub lower_bound: Option<f64>,
}

impl EntropyEstimate {
    pub fn exact(value: f64) -> Self {
        Self { value, epsilon: 0.0, method: Method::ExactEigen, certificate: None, lower_bound: Some(value) }
    }

    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }

    /// Width of the bracket `[lower_bound, value]`, if bracketed.
    pub fn gap(&self) -> Option<f64> {
        self.lower_bound.map(|l| self.value - l)
    }

    pub fn record(&self) -> EstimateRecord {
        EstimateRecord {
            value: finite_or_none(self.value),
            infinite: self.value.is_infinite(),
            epsilon: self.epsilon,
            method: self.method,
            lower_bound: self.lower_bound.and_then(finite_or_none),
        }
    }
}

/// Serializable view of an estimate (no certificate matrix).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EstimateRecord {
    pub value: Option<f64>,
    pub infinite: bool,
    pub epsilon: f64,
    pub method: Method,
    pub lower_bound: Option<f64>,
}

fn finite_or_none(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub(crate) fn check_eps(eps: f64) -> crate::Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(crate::Error::domain(format!("smoothing parameter {eps} outside [0, 1)")));
    }
    Ok(())
}
