use faer::Mat;

use super::density::DensityMatrix;
use super::layout::RegisterLayout;
use crate::error::{Error, Result};
use crate::linalg::{self, re, CMat};

#[derive(Clone, Debug)]
enum Repr {
    Dense(CMat),
    /// `|i⟩ ↦ |perm[i]⟩`
    Permutation(Vec<usize>),
}

/// A unitary over a register layout; basis permutations are kept implicit.
#[derive(Clone, Debug)]
pub struct UnitaryOp {
    layout: RegisterLayout,
    repr: Repr,
}

pub const UNITARY_TOL: f64 = 1e-10;

impl UnitaryOp {
    pub fn from_matrix(layout: RegisterLayout, m: CMat) -> Result<Self> {
        let d = layout.dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: m.nrows() });
        }
        let op = Self { layout, repr: Repr::Dense(m) };
        let err = op.unitarity_error();
        if err > UNITARY_TOL {
            return Err(Error::NotUnitary(err));
        }
        Ok(op)
    }

    pub fn identity(layout: RegisterLayout) -> Self {
        let d = layout.dim();
        Self { layout, repr: Repr::Permutation((0..d).collect()) }
    }

    pub fn permutation(layout: RegisterLayout, perm: Vec<usize>) -> Result<Self> {
        let d = layout.dim();
        if perm.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: perm.len() });
        }
        let mut seen = vec![false; d];
        for &p in &perm {
            if p >= d || seen[p] {
                return Err(Error::NotUnitary(1.0));
            }
            seen[p] = true;
        }
        Ok(Self { layout, repr: Repr::Permutation(perm) })
    }

    /// Exchanges register group `a` with group `b` (equal dimensions, factor by factor).
    pub fn swap_registers(layout: &RegisterLayout, a: &[&str], b: &[&str]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::layout("swapped groups need the same number of registers"));
        }
        let mut pa = Vec::new();
        let mut pb = Vec::new();
        for (x, y) in a.iter().zip(b) {
            let (i, j) = (layout.require(x)?, layout.require(y)?);
            let (di, dj) = (layout.factors()[i].dim, layout.factors()[j].dim);
            if di != dj {
                return Err(Error::DimensionMismatch { expected: di, got: dj });
            }
            pa.push(i);
            pb.push(j);
        }
        let d = layout.dim();
        let perm = (0..d)
            .map(|x| {
                let digits = layout.decode(x);
                let mut out = digits.clone();
                for (&i, &j) in pa.iter().zip(&pb) {
                    out[i] = digits[j];
                    out[j] = digits[i];
                }
                layout.encode(&out)
            })
            .collect();
        Self::permutation(layout.clone(), perm)
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn as_permutation(&self) -> Option<&[usize]> {
        match &self.repr {
            Repr::Permutation(p) => Some(p),
            Repr::Dense(_) => None,
        }
    }

    pub fn matrix(&self) -> CMat {
        match &self.repr {
            Repr::Dense(m) => m.clone(),
            Repr::Permutation(p) => {
                let d = p.len();
                let mut m = linalg::zeros(d, d);
                for (i, &pi) in p.iter().enumerate() {
                    m[(pi, i)] = re(1.0);
                }
                m
            }
        }
    }

    /// `max |(U†U − I)_ij|`.
    pub fn unitarity_error(&self) -> f64 {
        match &self.repr {
            Repr::Permutation(_) => 0.0,
            Repr::Dense(m) => {
                let p = m.adjoint() * m;
                linalg::max_abs_diff(&p, &linalg::identity(m.nrows()))
            }
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &UnitaryOp) -> Result<UnitaryOp> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch { left: self.layout.to_string(), right: other.layout.to_string() });
        }
        let repr = match (&self.repr, &other.repr) {
            (Repr::Permutation(a), Repr::Permutation(b)) => Repr::Permutation(b.iter().map(|&x| a[x]).collect()),
            _ => Repr::Dense(self.matrix() * other.matrix()),
        };
        Ok(UnitaryOp { layout: self.layout.clone(), repr })
    }

    pub fn adjoint(&self) -> UnitaryOp {
        let repr = match &self.repr {
            Repr::Dense(m) => Repr::Dense(linalg::adjoint(m)),
            Repr::Permutation(p) => {
                let mut inv = vec![0; p.len()];
                for (i, &x) in p.iter().enumerate() {
                    inv[x] = i;
                }
                Repr::Permutation(inv)
            }
        };
        UnitaryOp { layout: self.layout.clone(), repr }
    }

    /// `U ρ U†` on a raw matrix.
    pub(crate) fn conjugate_matrix(&self, m: &CMat) -> CMat {
        match &self.repr {
            Repr::Dense(u) => u * m * u.adjoint(),
            Repr::Permutation(p) => {
                let d = p.len();
                let mut inv = vec![0; d];
                for (i, &x) in p.iter().enumerate() {
                    inv[x] = i;
                }
                Mat::from_fn(d, d, |i, j| m[(inv[i], inv[j])])
            }
        }
    }

    /// Diagonal of `U diag(p) U†` for a permutation; `None` for dense operators.
    pub(crate) fn permute_probs(&self, p: &[f64]) -> Option<Vec<f64>> {
        match &self.repr {
            Repr::Permutation(perm) => {
                let mut out = vec![0.0; p.len()];
                for (i, &x) in perm.iter().enumerate() {
                    out[x] = p[i];
                }
                Some(out)
            }
            Repr::Dense(_) => None,
        }
    }

    pub fn apply(&self, state: &DensityMatrix) -> Result<DensityMatrix> {
        if *state.layout() != self.layout {
            return Err(Error::LayoutMismatch { left: self.layout.to_string(), right: state.layout().to_string() });
        }
        Ok(DensityMatrix::from_parts(self.layout.clone(), self.conjugate_matrix(state.matrix()), state.tolerance()))
    }

    /// Blocks `U_j` if the operator has the form `Σ_j U_j ⊗ |j⟩⟨j|` on `control`.
    pub fn control_blocks(&self, control: &str) -> Result<Option<Vec<UnitaryOp>>> {
        let cp = self.layout.require(control)?;
        let ell = self.layout.factors()[cp].dim;
        let rest = self.layout.without(&[control])?;
        let dr = rest.dim();
        // flat index in full layout of (rest index r, control value j)
        let order: Vec<&str> = rest.labels().into_iter().chain([control]).collect();
        let ordered = self.layout.reordered(&order)?;
        let map = self.layout.index_map_to(&ordered)?;
        let full = |r: usize, j: usize| map[r * ell + j];
        let mut inv = vec![0usize; map.len()];
        for (k, &x) in map.iter().enumerate() {
            inv[x] = k;
        }
        match &self.repr {
            Repr::Permutation(p) => {
                let mut blocks = Vec::with_capacity(ell);
                for j in 0..ell {
                    let mut bp = Vec::with_capacity(dr);
                    for r in 0..dr {
                        let image = inv[p[full(r, j)]];
                        if image % ell != j {
                            return Ok(None);
                        }
                        bp.push(image / ell);
                    }
                    blocks.push(UnitaryOp::permutation(rest.clone(), bp)?);
                }
                Ok(Some(blocks))
            }
            Repr::Dense(u) => {
                let tol = UNITARY_TOL;
                for cj in 0..ell {
                    for ci in 0..ell {
                        if ci == cj {
                            continue;
                        }
                        for b in 0..dr {
                            for a in 0..dr {
                                if u[(full(a, ci), full(b, cj))].norm() > tol {
                                    return Ok(None);
                                }
                            }
                        }
                    }
                }
                let mut blocks = Vec::with_capacity(ell);
                for j in 0..ell {
                    let m = Mat::from_fn(dr, dr, |a, b| u[(full(a, j), full(b, j))]);
                    blocks.push(UnitaryOp::from_matrix(rest.clone(), m)?);
                }
                Ok(Some(blocks))
            }
        }
    }

    /// `Σ_j U_j ⊗ |j⟩⟨j|` with the control register appended last.
    pub fn from_blocks(blocks: &[UnitaryOp], control: &str) -> Result<UnitaryOp> {
        let first = blocks.first().ok_or_else(|| Error::domain("no blocks"))?;
        let rest = first.layout.clone();
        let ell = blocks.len();
        let layout = rest.concat(&RegisterLayout::single(control, ell)?)?;
        let dr = rest.dim();
        if blocks.iter().all(|b| b.as_permutation().is_some()) {
            let mut perm = vec![0; dr * ell];
            for (j, b) in blocks.iter().enumerate() {
                let p = b.as_permutation().unwrap();
                for r in 0..dr {
                    perm[r * ell + j] = p[r] * ell + j;
                }
            }
            return UnitaryOp::permutation(layout, perm);
        }
        let mut m = linalg::zeros(dr * ell, dr * ell);
        for (j, b) in blocks.iter().enumerate() {
            let bm = b.matrix();
            for c in 0..dr {
                for r in 0..dr {
                    m[(r * ell + j, c * ell + j)] = bm[(r, c)];
                }
            }
        }
        UnitaryOp::from_matrix(layout, m)
    }
}

/// `Σ_j SWAP(target, blocks[j]) ⊗ |j⟩⟨j|_control` over `layout`.
///
/// `target` and each entry of `blocks` are register groups of matching dimensions;
/// a block equal to the target acts as the identity.
pub fn controlled_swap(
    layout: &RegisterLayout,
    control: &str,
    target: &[&str],
    blocks: &[Vec<&str>],
) -> Result<UnitaryOp> {
    let cp = layout.require(control)?;
    let ell = layout.factors()[cp].dim;
    if ell != blocks.len() {
        return Err(Error::DimensionMismatch { expected: ell, got: blocks.len() });
    }
    if target.contains(&control) || blocks.iter().any(|b| b.contains(&control)) {
        return Err(Error::layout("the control register cannot be swapped"));
    }
    let rest = layout.without(&[control])?;
    let mut ops = Vec::with_capacity(ell);
    for b in blocks {
        if b.as_slice() == target {
            ops.push(UnitaryOp::identity(rest.clone()));
        } else {
            ops.push(UnitaryOp::swap_registers(&rest, target, b)?);
        }
    }
    let op = UnitaryOp::from_blocks(&ops, control)?;
    if op.layout == *layout {
        return Ok(op);
    }
    // control register not last: conjugate by the reordering
    let map = op.layout.index_map_to(layout)?;
    let p = op.as_permutation().expect("swaps are permutations");
    let mut inv = vec![0; map.len()];
    for (k, &x) in map.iter().enumerate() {
        inv[x] = k;
    }
    let perm = (0..map.len()).map(|i| inv[p[map[i]]]).collect();
    UnitaryOp::permutation(layout.clone(), perm)
}

/// Convenience form with single-register targets.
pub fn controlled_swap_single(
    layout: &RegisterLayout,
    control: &str,
    target: &str,
    blocks: &[&str],
) -> Result<UnitaryOp> {
    let b: Vec<Vec<&str>> = blocks.iter().map(|x| vec![*x]).collect();
    controlled_swap(layout, control, &[target], &b)
}
