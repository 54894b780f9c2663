//! Joint states of protocol registers, kept as probability vectors when every
//! ingredient is diagonal and as dense matrices otherwise.

use std::borrow::Cow;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::qstate::{
    classical_fidelity, distance_from_fidelity, fidelity_with_spectrum, partial_trace_matrix, DensityMatrix,
    RegisterLayout, Spectrum, UnitaryOp,
};

#[derive(Clone, Debug)]
pub(crate) enum Sim {
    Classical { layout: RegisterLayout, p: Vec<f64> },
    Dense { layout: RegisterLayout, m: CMat },
}

/// Caps on the simulated total dimension.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Caps {
    pub dense: usize,
    pub classical: usize,
}

impl Sim {
    pub fn product(parts: &[&DensityMatrix], caps: Caps) -> Result<Sim> {
        let mut layout = RegisterLayout::trivial();
        for p in parts {
            layout = layout.concat(p.layout())?;
        }
        let d = layout.dim();
        if parts.iter().all(|p| p.is_diagonal()) {
            if d > caps.classical {
                return Err(Error::DimensionOverflow { dim: d, cap: caps.classical });
            }
            let mut p = vec![1.0];
            for s in parts {
                p = linalg::kron_vec(&p, &s.diagonal_probs());
            }
            return Ok(Sim::Classical { layout, p });
        }
        if d > caps.dense {
            return Err(Error::DimensionOverflow { dim: d, cap: caps.dense });
        }
        let mut m = linalg::identity(1);
        for s in parts {
            m = linalg::kron(&m, s.matrix());
        }
        Ok(Sim::Dense { layout, m })
    }

    pub fn layout(&self) -> &RegisterLayout {
        match self {
            Sim::Classical { layout, .. } | Sim::Dense { layout, .. } => layout,
        }
    }

    fn dense(&self) -> Cow<'_, CMat> {
        match self {
            Sim::Classical { p, .. } => Cow::Owned(linalg::diag_real(p)),
            Sim::Dense { m, .. } => Cow::Borrowed(m),
        }
    }

    /// `(1/n) Σ_j U_j · U_j†`: a uniform classical control that is discarded.
    pub fn average(&self, ops: &[UnitaryOp]) -> Result<Sim> {
        let n = ops.len() as f64;
        for op in ops {
            if op.layout() != self.layout() {
                return Err(Error::LayoutMismatch { left: self.layout().to_string(), right: op.layout().to_string() });
            }
        }
        let all_perm = ops.iter().all(|o| o.as_permutation().is_some());
        match self {
            Sim::Classical { layout, p } if all_perm => {
                let mut acc = vec![0.0; p.len()];
                for op in ops {
                    let moved = op.permute_probs(p).expect("permutation");
                    for (a, b) in acc.iter_mut().zip(moved) {
                        *a += b / n;
                    }
                }
                Ok(Sim::Classical { layout: layout.clone(), p: acc })
            }
            _ => {
                let m = self.dense();
                let d = m.nrows();
                let mut acc = linalg::zeros(d, d);
                for op in ops {
                    match op.as_permutation() {
                        Some(perm) => {
                            let mut inv = vec![0usize; d];
                            for (i, &x) in perm.iter().enumerate() {
                                inv[x] = i;
                            }
                            for j in 0..d {
                                for i in 0..d {
                                    acc[(i, j)] += m[(inv[i], inv[j])] * (1.0 / n);
                                }
                            }
                        }
                        None => {
                            let moved = op.conjugate_matrix(m.as_ref());
                            acc = linalg::lincomb(&acc, 1.0, &moved, 1.0 / n);
                        }
                    }
                }
                Ok(Sim::Dense { layout: self.layout().clone(), m: acc })
            }
        }
    }

    /// Marginal on `keep`, in this layout's order.
    pub fn reduced(&self, keep: &[&str]) -> Result<Sim> {
        let layout = self.layout();
        for l in keep {
            layout.require(l)?;
        }
        let labels: Vec<&str> = layout.labels().into_iter().filter(|l| keep.contains(l)).collect();
        let target = layout.select(&labels)?;
        match self {
            Sim::Classical { p, .. } => {
                let pos: Vec<usize> = labels.iter().map(|l| layout.position(l).expect("checked")).collect();
                let dims = layout.dims();
                let tstr = target.strides();
                let mut out = vec![0.0; target.dim()];
                let mut digits = vec![0usize; dims.len()];
                for &x in p.iter() {
                    let mut t = 0;
                    for (k, &q) in pos.iter().enumerate() {
                        t += digits[q] * tstr[k];
                    }
                    out[t] += x;
                    for k in (0..dims.len()).rev() {
                        digits[k] += 1;
                        if digits[k] < dims[k] {
                            break;
                        }
                        digits[k] = 0;
                    }
                }
                Ok(Sim::Classical { layout: target, p: out })
            }
            Sim::Dense { m, .. } => {
                let discard: Vec<&str> = layout.labels().into_iter().filter(|l| !keep.contains(l)).collect();
                let (_, r) = partial_trace_matrix(layout, m, &discard)?;
                Ok(Sim::Dense { layout: target, m: r })
            }
        }
    }

    pub fn state(&self, tolerance: f64) -> DensityMatrix {
        DensityMatrix::from_parts(self.layout().clone(), linalg::hermitian_part(self.dense().as_ref()), tolerance)
    }

    /// `F(self, σ^{⊗k})` where this layout is `k` consecutive blocks shaped like `σ`.
    pub fn fidelity_power(&self, sigma: &DensityMatrix, spectrum: Option<&Spectrum>) -> Result<f64> {
        let d = self.layout().dim();
        let ds = sigma.dim();
        let mut k = 0;
        let mut acc = 1usize;
        while acc < d {
            acc *= ds;
            k += 1;
        }
        if acc != d || k == 0 {
            return Err(Error::DimensionMismatch { expected: d, got: acc });
        }
        match self {
            Sim::Classical { p, .. } if sigma.is_diagonal() => {
                let q1 = sigma.diagonal_probs();
                let mut q = vec![1.0];
                for _ in 0..k {
                    q = linalg::kron_vec(&q, &q1);
                }
                Ok(classical_fidelity(p, &q))
            }
            _ => {
                let owned;
                let spec = match spectrum {
                    Some(s) if s.values.len() == d => s,
                    _ => {
                        owned = Spectrum::of(sigma)?.power(k);
                        &owned
                    }
                };
                fidelity_with_spectrum(self.dense().as_ref(), spec)
            }
        }
    }

    /// `max |Θ − Θ_A ⊗ Θ_B|` for the split after the first `first` registers.
    pub fn product_error(&self, first: usize) -> Result<f64> {
        let labels = self.layout().labels();
        let (a, b) = labels.split_at(first);
        let ra = self.reduced(a)?;
        let rb = self.reduced(b)?;
        Ok(match (self, &ra, &rb) {
            (Sim::Classical { p, .. }, Sim::Classical { p: pa, .. }, Sim::Classical { p: pb, .. }) => {
                let prod = linalg::kron_vec(pa, pb);
                p.iter().zip(&prod).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
            }
            _ => {
                let prod = linalg::kron(ra.dense().as_ref(), rb.dense().as_ref());
                linalg::max_abs_diff(self.dense().as_ref(), &prod)
            }
        })
    }

    /// Purified distance between two simulated states on the same layout.
    pub fn distance(&self, other: &Sim) -> Result<f64> {
        if self.layout() != other.layout() {
            return Err(Error::LayoutMismatch { left: self.layout().to_string(), right: other.layout().to_string() });
        }
        let f = match (self, other) {
            (Sim::Classical { p, .. }, Sim::Classical { p: q, .. }) => classical_fidelity(p, q),
            _ => fidelity_with_spectrum(self.dense().as_ref(), &Spectrum::of_matrix(other.dense().as_ref())?)?,
        };
        Ok(distance_from_fidelity(f))
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        match self {
            Sim::Classical { p, .. } => {
                let d = p.len();
                let m = other.matrix();
                let mut worst: f64 = 0.0;
                for j in 0..d {
                    for i in 0..d {
                        let x = if i == j { p[i] } else { 0.0 };
                        worst = worst.max((m[(i, j)] - linalg::re(x)).norm());
                    }
                }
                worst
            }
            Sim::Dense { m, .. } => linalg::max_abs_diff(m, other.matrix()),
        }
    }
}
