//! Small dense complex kernels on top of `faer`.

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = Mat<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn zeros(n: usize, m: usize) -> CMat {
    Mat::zeros(n, m)
}

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
}

pub fn diag_real(values: &[f64]) -> CMat {
    let n = values.len();
    Mat::from_fn(n, n, |i, j| if i == j { re(values[i]) } else { ZERO })
}

pub fn adjoint(a: &CMat) -> CMat {
    a.adjoint().to_owned()
}

pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    a * b
}

pub fn add(a: &CMat, b: &CMat) -> CMat {
    a + b
}

pub fn sub(a: &CMat, b: &CMat) -> CMat {
    a - b
}

pub fn scale(a: &CMat, s: f64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

/// `a * s + b * t`.
pub fn lincomb(a: &CMat, s: f64, b: &CMat, t: f64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s + b[(i, j)] * t)
}

pub fn trace(a: &CMat) -> C64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

/// Real part of `Tr(a b)` for Hermitian `a`, `b` without forming the product.
pub fn inner_re(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

pub fn frobenius(a: &CMat) -> f64 {
    let mut acc = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += a[(i, j)].norm_sqr();
        }
    }
    acc.sqrt()
}

pub fn max_abs(a: &CMat) -> f64 {
    let mut m: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    let mut m: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

pub fn hermitian_part(a: &CMat) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_error(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut m: f64 = 0.0;
    for j in 0..n {
        for i in 0..=j {
            m = m.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    m
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    let mut out = zeros(ar * br, ac * bc);
    for ja in 0..ac {
        for ia in 0..ar {
            let x = a[(ia, ja)];
            if x == ZERO {
                continue;
            }
            for jb in 0..bc {
                for ib in 0..br {
                    out[(ia * br + ib, ja * bc + jb)] = x * b[(ib, jb)];
                }
            }
        }
    }
    out
}

pub fn kron_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(x * y);
        }
    }
    out
}

/// Hermitian eigendecomposition; eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

pub fn eigh(a: &CMat) -> Result<Eigh> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch { expected: n, got: a.ncols() });
    }
    if n == 0 {
        return Ok(Eigh { values: vec![], vectors: zeros(0, 0) });
    }
    let h = hermitian_part(a);
    let e = h
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
    let s = e.S();
    let u = e.U();
    let mut order: Vec<usize> = (0..n).collect();
    let vals: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite eigenvalue".into()));
    }
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
    let values = order.iter().map(|&i| vals[i]).collect();
    let vectors = Mat::from_fn(n, n, |i, j| u[(i, order[j])]);
    Ok(Eigh { values, vectors })
}

pub fn eigvalsh(a: &CMat) -> Result<Vec<f64>> {
    Ok(eigh(a)?.values)
}

impl Eigh {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// `V f(Λ) V†`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMat {
        let n = self.dim();
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let keep: Vec<usize> = (0..n).filter(|&k| fv[k] != 0.0).collect();
        let mut left = zeros(n, keep.len());
        let mut right = zeros(keep.len(), n);
        for (c, &k) in keep.iter().enumerate() {
            for i in 0..n {
                let v = self.vectors[(i, k)];
                left[(i, c)] = v * fv[k];
                right[(c, i)] = v.conj();
            }
        }
        if keep.is_empty() {
            return zeros(n, n);
        }
        &left * &right
    }

    /// Threshold used for support decisions: `rel * max eigenvalue`.
    pub fn support_threshold(&self, rel: f64) -> f64 {
        rel * self.max().max(0.0)
    }

    /// Indices of eigenvalues strictly above `thr`.
    pub fn support_indices(&self, thr: f64) -> Vec<usize> {
        (0..self.dim()).filter(|&k| self.values[k] > thr).collect()
    }

    /// Columns of the eigenvector matrix for the given indices.
    pub fn columns(&self, idx: &[usize]) -> CMat {
        let n = self.dim();
        Mat::from_fn(n, idx.len(), |i, c| self.vectors[(i, idx[c])])
    }

    pub fn projector(&self, idx: &[usize]) -> CMat {
        let v = self.columns(idx);
        &v * v.adjoint()
    }
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm_hermitian(a: &CMat) -> Result<f64> {
    Ok(eigvalsh(a)?.iter().map(|x| x.abs()).sum())
}

pub fn psd_sqrt(a: &CMat) -> Result<CMat> {
    Ok(eigh(a)?.apply(|x| x.max(0.0).sqrt()))
}

/// Euclidean projection of a real vector onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    if n == 0 {
        return vec![];
    }
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (k, &x) in u.iter().enumerate() {
        css += x;
        let t = (css - 1.0) / (k as f64 + 1.0);
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Projection of a Hermitian matrix onto density matrices in Frobenius norm.
pub fn project_density(a: &CMat) -> Result<CMat> {
    let e = eigh(a)?;
    let values = project_simplex(&e.values);
    Ok(Eigh { values, vectors: e.vectors }.apply(|x| x))
}

/// Normalized state vector check helper: squared norm.
pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

pub fn outer(v: &[C64]) -> CMat {
    let n = v.len();
    Mat::from_fn(n, n, |i, j| v[i] * v[j].conj())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_projection_of_point_inside_is_identity() {
        let p = project_simplex(&[0.2, 0.3, 0.5]);
        assert!((p[0] - 0.2).abs() < 1e-15 && (p[2] - 0.5).abs() < 1e-15);
        let q = project_simplex(&[2.0, 0.0]);
        assert_eq!(q, vec![1.0, 0.0]);
    }

    #[test]
    fn eigh_sorted_and_reconstructs() {
        let a =
            Mat::from_fn(
                3,
                3,
                |i, j| {
                    if i == j {
                        re((3 - i) as f64)
                    } else {
                        C64::new(0.1, if i < j { 0.2 } else { -0.2 })
                    }
                },
            );
        let e = eigh(&a).unwrap();
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        assert!(max_abs_diff(&e.apply(|x| x), &a) < 1e-12);
    }

    #[test]
    fn kron_of_identities() {
        let k = kron(&identity(2), &identity(3));
        assert!(max_abs_diff(&k, &identity(6)) == 0.0);
    }
}
