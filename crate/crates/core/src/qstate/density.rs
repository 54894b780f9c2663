use faer::Mat;

use super::layout::RegisterLayout;
use crate::error::{Error, Result};
use crate::linalg::{self, re, CMat, Eigh, C64, ZERO};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Relative eigenvalue threshold used for support decisions.
pub const SUPPORT_REL: f64 = 1e-10;

/// A unit-trace positive semidefinite matrix over a register layout.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    layout: RegisterLayout,
    matrix: CMat,
    tolerance: f64,
}

impl DensityMatrix {
    pub fn new(layout: RegisterLayout, matrix: CMat) -> Result<Self> {
        Self::with_tolerance(layout, matrix, DEFAULT_TOLERANCE)
    }

    pub fn with_tolerance(layout: RegisterLayout, matrix: CMat, tolerance: f64) -> Result<Self> {
        if !(tolerance >= 0.0) {
            return Err(Error::domain("tolerance must be nonnegative"));
        }
        let d = layout.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: matrix.nrows().max(matrix.ncols()) });
        }
        let herm = linalg::hermiticity_error(&matrix);
        if herm > tolerance {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = linalg::trace(&matrix).re;
        if (tr - 1.0).abs() > tolerance {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = linalg::eigvalsh(&matrix)?.first().copied().unwrap_or(0.0);
        if min < -tolerance {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { layout, matrix: linalg::hermitian_part(&matrix), tolerance })
    }

    /// Wraps a matrix produced by a validity-preserving operation.
    pub(crate) fn from_parts(layout: RegisterLayout, matrix: CMat, tolerance: f64) -> Self {
        debug_assert_eq!(layout.dim(), matrix.nrows());
        Self { layout, matrix, tolerance }
    }

    pub fn maximally_mixed(layout: RegisterLayout) -> Self {
        let d = layout.dim();
        let m = linalg::scale(&linalg::identity(d), 1.0 / d as f64);
        Self::from_parts(layout, m, DEFAULT_TOLERANCE)
    }

    /// Pure state from amplitudes; the vector is normalized.
    pub fn pure(layout: RegisterLayout, amplitudes: &[C64]) -> Result<Self> {
        let d = layout.dim();
        if amplitudes.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: amplitudes.len() });
        }
        let n = linalg::norm_sqr(amplitudes).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let v: Vec<C64> = amplitudes.iter().map(|a| a / n).collect();
        Ok(Self::from_parts(layout, linalg::outer(&v), DEFAULT_TOLERANCE))
    }

    pub fn basis(layout: RegisterLayout, index: usize) -> Result<Self> {
        let d = layout.dim();
        if index >= d {
            return Err(Error::domain(format!("basis index {index} out of range for dimension {d}")));
        }
        let m = Mat::from_fn(d, d, |i, j| if i == index && j == index { re(1.0) } else { ZERO });
        Ok(Self::from_parts(layout, m, DEFAULT_TOLERANCE))
    }

    pub fn diagonal(layout: RegisterLayout, probs: &[f64]) -> Result<Self> {
        let d = layout.dim();
        if probs.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: probs.len() });
        }
        if probs.iter().any(|&p| !(p >= -DEFAULT_TOLERANCE) || !p.is_finite()) {
            return Err(Error::InvalidState("negative or non-finite probability".into()));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > DEFAULT_TOLERANCE {
            return Err(Error::InvalidState(format!("probabilities sum to {s}")));
        }
        Ok(Self::from_parts(layout, linalg::diag_real(probs), DEFAULT_TOLERANCE))
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn with_tol(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.matrix[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    pub fn eigh(&self) -> Result<Eigh> {
        linalg::eigh(&self.matrix)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::eigvalsh(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        linalg::frobenius(&self.matrix).powi(2)
    }

    pub fn rank(&self) -> Result<usize> {
        let e = self.eigh()?;
        let thr = e.support_threshold(SUPPORT_REL).max(self.tolerance);
        Ok(e.support_indices(thr).len())
    }

    pub fn diagonal_probs(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// Frobenius mass of the off-diagonal part.
    pub fn off_diagonal_mass(&self) -> f64 {
        let d = self.dim();
        let mut acc = 0.0;
        for j in 0..d {
            for i in 0..d {
                if i != j {
                    acc += self.matrix[(i, j)].norm_sqr();
                }
            }
        }
        acc.sqrt()
    }

    pub fn is_diagonal(&self) -> bool {
        self.off_diagonal_mass() <= self.tolerance
    }

    /// Same matrix on a layout with identical dimensions but different labels.
    pub fn relabel(&self, layout: RegisterLayout) -> Result<Self> {
        if layout.dims() != self.layout.dims() {
            return Err(Error::LayoutMismatch { left: self.layout.to_string(), right: layout.to_string() });
        }
        Ok(Self::from_parts(layout, self.matrix.clone(), self.tolerance))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.layout == other.layout && linalg::max_abs_diff(&self.matrix, &other.matrix) <= tol
    }

    /// Convex combination `Σ w_i ρ_i` with weights summing to one.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::domain("empty mixture"))?.1;
        let d = first.dim();
        let mut m = linalg::zeros(d, d);
        let mut wsum = 0.0;
        let mut tol: f64 = 0.0;
        for (w, s) in parts {
            if s.layout != first.layout {
                return Err(Error::LayoutMismatch { left: first.layout.to_string(), right: s.layout.to_string() });
            }
            if !(*w >= 0.0) {
                return Err(Error::domain("mixture weights must be nonnegative"));
            }
            wsum += w;
            tol = tol.max(s.tolerance);
            for j in 0..d {
                for i in 0..d {
                    m[(i, j)] += s.matrix[(i, j)] * *w;
                }
            }
        }
        if (wsum - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("mixture weights sum to {wsum}")));
        }
        Ok(Self::from_parts(first.layout.clone(), m, tol))
    }

    pub(crate) fn check_same_layout(&self, other: &Self) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch { left: self.layout.to_string(), right: other.layout.to_string() });
        }
        Ok(())
    }
}
