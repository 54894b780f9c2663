use faer::Mat;

use super::density::DensityMatrix;
use super::layout::RegisterLayout;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, ZERO};

/// Partial trace of a raw matrix over `discard`, result ordered as the kept labels.
pub(crate) fn partial_trace_matrix(
    layout: &RegisterLayout,
    m: &CMat,
    discard: &[&str],
) -> Result<(RegisterLayout, CMat)> {
    let keep = layout.without(discard)?;
    let gone = layout.select(discard)?;
    let order: Vec<&str> = keep.labels().into_iter().chain(gone.labels()).collect();
    let target = layout.reordered(&order)?;
    let map = layout.index_map_to(&target)?;
    let dk = keep.dim();
    let dt = gone.dim();
    let mut out = linalg::zeros(dk, dk);
    for b in 0..dk {
        for a in 0..dk {
            let mut acc = ZERO;
            for t in 0..dt {
                acc += m[(map[a * dt + t], map[b * dt + t])];
            }
            out[(a, b)] = acc;
        }
    }
    Ok((keep, out))
}

pub(crate) fn reorder_matrix(layout: &RegisterLayout, m: &CMat, target: &RegisterLayout) -> Result<CMat> {
    let map = layout.index_map_to(target)?;
    let d = map.len();
    Ok(Mat::from_fn(d, d, |i, j| m[(map[i], map[j])]))
}

/// Partial transpose on the listed registers.
pub(crate) fn partial_transpose_matrix(layout: &RegisterLayout, m: &CMat, labels: &[&str]) -> Result<CMat> {
    let pos: Vec<usize> = labels.iter().map(|l| layout.require(l)).collect::<Result<_>>()?;
    let d = layout.dim();
    let strides = layout.strides();
    // contribution of the transposed registers to each flat index
    let part: Vec<usize> = (0..d)
        .map(|x| {
            let digits = layout.decode(x);
            pos.iter().map(|&p| digits[p] * strides[p]).sum()
        })
        .collect();
    let mut out = linalg::zeros(d, d);
    for j in 0..d {
        for i in 0..d {
            let ni = i - part[i] + part[j];
            let nj = j - part[j] + part[i];
            out[(ni, nj)] = m[(i, j)];
        }
    }
    Ok(out)
}

impl DensityMatrix {
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let layout = self.layout().concat(other.layout())?;
        let m = linalg::kron(self.matrix(), other.matrix());
        Ok(DensityMatrix::from_parts(layout, m, self.tolerance().max(other.tolerance())))
    }

    /// `n` copies labeled `#1..#n`.
    pub fn tensor_power(&self, n: usize) -> Result<DensityMatrix> {
        if n == 0 {
            return Err(Error::domain("tensor power needs n >= 1"));
        }
        let layout = self.layout().power(n)?;
        let mut m = self.matrix().clone();
        for _ in 1..n {
            m = linalg::kron(&m, self.matrix());
        }
        Ok(DensityMatrix::from_parts(layout, m, self.tolerance()))
    }

    pub fn partial_trace(&self, discard: &[&str]) -> Result<DensityMatrix> {
        let (layout, m) = partial_trace_matrix(self.layout(), self.matrix(), discard)?;
        Ok(DensityMatrix::from_parts(layout, m, self.tolerance()))
    }

    /// Marginal on `keep`, in this layout's order.
    pub fn reduced(&self, keep: &[&str]) -> Result<DensityMatrix> {
        for l in keep {
            self.layout().require(l)?;
        }
        let labels = self.layout().labels();
        let discard: Vec<&str> = labels.iter().copied().filter(|l| !keep.contains(l)).collect();
        self.partial_trace(&discard)
    }

    /// Same state with its factors reordered.
    pub fn permute(&self, order: &[&str]) -> Result<DensityMatrix> {
        let target = self.layout().reordered(order)?;
        let m = reorder_matrix(self.layout(), self.matrix(), &target)?;
        Ok(DensityMatrix::from_parts(target, m, self.tolerance()))
    }

    pub fn partial_transpose(&self, labels: &[&str]) -> Result<CMat> {
        partial_transpose_matrix(self.layout(), self.matrix(), labels)
    }

    /// Dephases the listed registers in their computational bases.
    pub fn pinch(&self, labels: &[&str]) -> Result<DensityMatrix> {
        let pos: Vec<usize> = labels.iter().map(|l| self.layout().require(l)).collect::<Result<_>>()?;
        let l = self.layout();
        let d = self.dim();
        let digits: Vec<Vec<usize>> = (0..d).map(|i| l.decode(i)).collect();
        let m = Mat::from_fn(d, d, |i, j| {
            if pos.iter().all(|&p| digits[i][p] == digits[j][p]) {
                self.matrix()[(i, j)]
            } else {
                ZERO
            }
        });
        Ok(DensityMatrix::from_parts(l.clone(), m, self.tolerance()))
    }

    /// Frobenius mass of the entries off the block diagonal of `label`.
    pub fn off_block_mass(&self, label: &str) -> Result<f64> {
        let p = self.layout().require(label)?;
        let l = self.layout();
        let d = self.dim();
        let digit: Vec<usize> = (0..d).map(|i| l.decode(i)[p]).collect();
        let mut acc = 0.0;
        for j in 0..d {
            for i in 0..d {
                if digit[i] != digit[j] {
                    acc += self.matrix()[(i, j)].norm_sqr();
                }
            }
        }
        Ok(acc.sqrt())
    }

    pub fn is_classical_on(&self, label: &str) -> Result<bool> {
        Ok(self.off_block_mass(label)? <= self.tolerance())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{re, C64};

    fn bell() -> DensityMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::pure(
            RegisterLayout::qubits(&["A", "B"]).unwrap(),
            &[re(h), C64::new(0.0, 0.0), C64::new(0.0, 0.0), re(h)],
        )
        .unwrap()
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let r = bell().partial_trace(&["B"]).unwrap();
        let mm = DensityMatrix::maximally_mixed(RegisterLayout::qubits(&["A"]).unwrap());
        assert!(r.approx_eq(&mm, 1e-15));
    }

    #[test]
    fn tensor_rejects_collisions() {
        let a = DensityMatrix::maximally_mixed(RegisterLayout::qubits(&["A"]).unwrap());
        assert!(matches!(a.tensor(&a), Err(Error::LabelCollision(_))));
    }

    #[test]
    fn bell_partial_transpose_has_negative_eigenvalue() {
        let pt = bell().partial_transpose(&["B"]).unwrap();
        let ev = linalg::eigvalsh(&pt).unwrap();
        assert!((ev[0] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn permute_then_back() {
        let a = DensityMatrix::basis(RegisterLayout::qubits(&["A"]).unwrap(), 1).unwrap();
        let b = DensityMatrix::maximally_mixed(RegisterLayout::new([("B", 3)]).unwrap());
        let ab = a.tensor(&b).unwrap();
        let ba = ab.permute(&["B", "A"]).unwrap();
        assert!(ba.approx_eq(&b.tensor(&a).unwrap(), 0.0));
        assert!(ba.permute(&["A", "B"]).unwrap().approx_eq(&ab, 0.0));
    }
}
