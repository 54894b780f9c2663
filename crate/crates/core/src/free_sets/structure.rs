use super::FreeSet;
use crate::entropies::EntropyEstimate;
use crate::error::{Error, Result};
use crate::linalg;
use crate::qstate::{DensityMatrix, RegisterLayout, UnitaryOp};

/// Largest total dimension `regularized_e` will build.
pub const MAX_REGULARIZED_DIM: usize = 4096;

/// `(1/ℓ) Σ_k |k⟩⟨k|^{⊗t}`: perfectly correlated uniform randomness shared by `t` parties.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SharedRandomnessState {
    pub ell: usize,
    pub parties: usize,
}

impl SharedRandomnessState {
    pub fn new(ell: usize, parties: usize) -> Result<Self> {
        if ell == 0 || parties == 0 {
            return Err(Error::domain("shared randomness needs ell >= 1 and at least one party"));
        }
        Ok(Self { ell, parties })
    }

    /// The state on one register per party, labeled by `labels`.
    pub fn state(&self, labels: &[&str]) -> Result<DensityMatrix> {
        if labels.len() != self.parties {
            return Err(Error::DimensionMismatch { expected: self.parties, got: labels.len() });
        }
        let layout = RegisterLayout::new(labels.iter().map(|l| (l.to_string(), self.ell)))?;
        let d = layout.dim();
        let mut p = vec![0.0; d];
        for k in 0..self.ell {
            p[layout.encode(&vec![k; self.parties])] = 1.0 / self.ell as f64;
        }
        DensityMatrix::diagonal(layout, &p)
    }
}

impl FreeSet {
    /// Whether `op` has the block form `Σ_j U_j ⊗ |j⟩⟨j|` on `control` and maps each
    /// sample `σ` to a member `(1/ℓ) Σ_j U_j σ U_j† ⊗ |j⟩⟨j|`.
    pub fn block_structure_check(&self, op: &UnitaryOp, control: &str, samples: &[DensityMatrix]) -> Result<bool> {
        self.check_supported()?;
        let Some(blocks) = op.control_blocks(control)? else {
            return Ok(false);
        };
        let ell = blocks.len();
        let rest = op.layout().without(&[control])?;
        for s in samples {
            if *s.layout() != rest {
                return Err(Error::LayoutMismatch { left: rest.to_string(), right: s.layout().to_string() });
            }
            let d = rest.dim();
            let mut m = linalg::zeros(d * ell, d * ell);
            for (j, u) in blocks.iter().enumerate() {
                let moved = u.apply(s)?;
                for c in 0..d {
                    for r in 0..d {
                        m[(r * ell + j, c * ell + j)] = moved.matrix()[(r, c)] * (1.0 / ell as f64);
                    }
                }
            }
            let layout = rest.concat(&RegisterLayout::single(control, ell)?)?;
            // a mixture of unitary images of a state: positive and normalized by construction
            let state = DensityMatrix::from_parts(layout, m, s.tolerance());
            if !self.membership(&state)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `E(ρ^{⊗n})/n` for `n = 1..=n_max`. The separable family switches to its PPT
    /// relaxation once the cut outgrows 2×3. Families whose measure is additive are
    /// checked for a constant sequence.
    pub fn regularized_e(&self, rho: &DensityMatrix, n_max: usize) -> Result<Vec<EntropyEstimate>> {
        self.check_supported()?;
        if n_max == 0 {
            return Err(Error::domain("n_max must be at least 1"));
        }
        let total = (rho.dim() as f64).powi(n_max as i32);
        if total > MAX_REGULARIZED_DIM as f64 {
            return Err(Error::DimensionOverflow {
                dim: total.min(usize::MAX as f64) as usize,
                cap: MAX_REGULARIZED_DIM,
            });
        }
        let mut out = Vec::with_capacity(n_max);
        for n in 1..=n_max {
            let state = if n == 1 { rho.clone() } else { rho.tensor_power(n)? };
            let family = if n == 1 { self.clone() } else { self.relaxed() };
            let (_, mut e) = family.closest_free_relent(&state)?;
            e.value /= n as f64;
            e.lower_bound = e.lower_bound.map(|l| l / n as f64);
            out.push(e);
        }
        let additive = matches!(
            self,
            FreeSet::Coherence | FreeSet::Uniformity | FreeSet::Gibbs { .. } | FreeSet::SharedRandomness { .. }
        );
        if additive {
            let first = out[0].value;
            for (k, e) in out.iter().enumerate() {
                if (e.value - first).abs() > 1e-6 {
                    return Err(Error::Additivity(format!(
                        "E(rho^{{⊗{}}})/{} = {} differs from E(rho) = {first}",
                        k + 1,
                        k + 1,
                        e.value
                    )));
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::controlled_swap_single;

    #[test]
    fn shared_state_marginals_are_uniform() {
        let s = SharedRandomnessState::new(3, 2).unwrap().state(&["JA", "JB"]).unwrap();
        let m = s.reduced(&["JA"]).unwrap();
        assert!(m.approx_eq(&DensityMatrix::maximally_mixed(m.layout().clone()), 1e-15));
        assert!(FreeSet::SharedRandomness { parties: 2 }.membership(&s).unwrap());
    }

    #[test]
    fn swap_blocks_preserve_incoherent_states() {
        let l = RegisterLayout::new([("M", 2), ("M#1", 2), ("J", 2)]).unwrap();
        let op = controlled_swap_single(&l, "J", "M", &["M", "M#1"]).unwrap();
        let rest = l.without(&["J"]).unwrap();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
        let samples: Vec<DensityMatrix> =
            (0..5).map(|_| FreeSet::Coherence.sample_member(&rest, &mut rng).unwrap()).collect();
        assert!(FreeSet::Coherence.block_structure_check(&op, "J", &samples).unwrap());
    }
}
