use faer::Mat;

use super::density::{DensityMatrix, SUPPORT_REL};
use crate::error::Result;
use crate::linalg::{self, CMat, Eigh};

/// Eigendecomposition of a state, composable under tensor products.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl Spectrum {
    pub fn of(state: &DensityMatrix) -> Result<Self> {
        let Eigh { values, vectors } = state.eigh()?;
        Ok(Self { values, vectors })
    }

    pub fn of_matrix(m: &CMat) -> Result<Self> {
        let Eigh { values, vectors } = linalg::eigh(m)?;
        Ok(Self { values, vectors })
    }

    pub fn tensor(&self, other: &Spectrum) -> Spectrum {
        Spectrum {
            values: linalg::kron_vec(&self.values, &other.values),
            vectors: linalg::kron(&self.vectors, &other.vectors),
        }
    }

    pub fn power(&self, n: usize) -> Spectrum {
        let mut s = self.clone();
        for _ in 1..n {
            s = s.tensor(self);
        }
        s
    }

    pub fn support(&self) -> Vec<usize> {
        let max = self.values.iter().copied().fold(0.0, f64::max);
        let thr = SUPPORT_REL * max;
        (0..self.values.len()).filter(|&k| self.values[k] > thr).collect()
    }
}

/// `F(a, b)` where `b` is given through its spectrum.
pub fn fidelity_with_spectrum(a: &CMat, b: &Spectrum) -> Result<f64> {
    let idx = b.support();
    let n = a.nrows();
    let v = Mat::from_fn(n, idx.len(), |i, c| b.vectors[(i, idx[c])]);
    let s: Vec<f64> = idx.iter().map(|&k| b.values[k].max(0.0).sqrt()).collect();
    let av = a * &v;
    let mut m = v.adjoint() * &av;
    for j in 0..idx.len() {
        for i in 0..idx.len() {
            m[(i, j)] *= s[i] * s[j];
        }
    }
    let ev = linalg::eigvalsh(&m)?;
    // rounding noise on a null eigenvalue would otherwise enter through its square root
    let floor = 64.0 * f64::EPSILON * ev.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let f: f64 = ev.iter().filter(|&&x| x > floor).map(|x| x.sqrt()).sum();
    Ok(f.clamp(0.0, 1.0))
}

/// Fidelity `‖√a √b‖₁`.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    a.check_same_layout(b)?;
    if a.is_diagonal() && b.is_diagonal() {
        return Ok(classical_fidelity(&a.diagonal_probs(), &b.diagonal_probs()));
    }
    fidelity_with_spectrum(a.matrix(), &Spectrum::of(b)?)
}

/// `√(1 − F²)`.
pub fn purified_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    Ok(distance_from_fidelity(fidelity(a, b)?))
}

pub fn distance_from_fidelity(f: f64) -> f64 {
    (1.0 - f * f).max(0.0).sqrt()
}

/// `‖a − b‖₁`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    a.check_same_layout(b)?;
    linalg::trace_norm_hermitian(&linalg::sub(a.matrix(), b.matrix()))
}

pub fn classical_fidelity(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(&x, &y)| (x.max(0.0) * y.max(0.0)).sqrt()).sum::<f64>().clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::RegisterLayout;

    #[test]
    fn pure_vs_mixed() {
        let l = RegisterLayout::qubits(&["A"]).unwrap();
        let z = DensityMatrix::basis(l.clone(), 0).unwrap();
        let mm = DensityMatrix::maximally_mixed(l);
        let f = fidelity(&z, &mm).unwrap();
        assert!((f - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
    }
}
