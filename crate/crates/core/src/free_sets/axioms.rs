//! Sampled checks of the closure properties every family must have.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::FreeSet;
use crate::error::Result;
use crate::linalg;
use crate::qstate::{base_label, DensityMatrix, RegisterLayout};

const RANDOMNESS_LABEL: &str = "J";

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct AxiomTally {
    pub property: String,
    pub trials: usize,
    pub failures: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct AxiomReport {
    pub family: String,
    pub layout: String,
    pub tallies: Vec<AxiomTally>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.tallies.iter().all(|t| t.failures == 0 && t.trials > 0)
    }
}

impl FreeSet {
    /// Draws `samples` members (or pairs of members) per property and tests
    /// convexity, closure under tensor products and partial traces, membership
    /// of the maximally mixed state of a fresh randomness register `J`, and
    /// invariance under reversing the registers when the family treats them alike.
    ///
    /// Tensor products live on two labeled copies of `layout`; for the separable
    /// family the enlarged cut is tested with the PPT relaxation.
    pub fn axiom_check<R: Rng + ?Sized>(
        &self,
        layout: &RegisterLayout,
        samples: usize,
        rng: &mut R,
    ) -> Result<AxiomReport> {
        self.check_supported()?;
        let mut tallies = Vec::new();
        let mut tally = |property: &str, outcomes: Vec<bool>| {
            tallies.push(AxiomTally {
                property: property.into(),
                trials: outcomes.len(),
                failures: outcomes.iter().filter(|ok| !**ok).count(),
            });
        };

        let mut convex = Vec::with_capacity(samples);
        for _ in 0..samples {
            let a = self.sample_member(layout, rng)?;
            let b = self.sample_member(layout, rng)?;
            let w: f64 = rng.gen();
            convex.push(self.membership(&DensityMatrix::mixture(&[(w, &a), (1.0 - w, &b)])?)?);
        }
        tally("convexity", convex);

        let wide = self.relaxed();
        let (l1, l2) = (layout.copy(1), layout.copy(2));
        let mut tensor = Vec::with_capacity(samples);
        for _ in 0..samples {
            let a = self.sample_member(layout, rng)?.relabel(l1.clone())?;
            let b = self.sample_member(layout, rng)?.relabel(l2.clone())?;
            tensor.push(wide.membership(&a.tensor(&b)?)?);
        }
        tally("tensor-closure", tensor);

        let labels = layout.labels();
        let mut trace = Vec::new();
        if labels.len() >= 2 {
            for s in 0..samples {
                let member = self.sample_member(layout, rng)?;
                let drop = labels[s % labels.len()];
                trace.push(self.membership(&member.partial_trace(&[drop])?)?);
            }
        } else {
            // one register: trace over the second copy of a product member
            for _ in 0..samples {
                let a = self.sample_member(layout, rng)?.relabel(l1.clone())?;
                let b = self.sample_member(layout, rng)?.relabel(l2.clone())?;
                let drop: Vec<&str> = l2.labels();
                let back = a.tensor(&b)?.partial_trace(&drop)?.relabel(layout.clone())?;
                trace.push(self.membership(&back)?);
            }
        }
        tally("trace-closure", trace);

        // a randomness register is one the family attaches no data to
        let fresh = RegisterLayout::single(RANDOMNESS_LABEL, layout.dims().first().copied().unwrap_or(2))?;
        tally("maximally-mixed", vec![self.membership(&DensityMatrix::maximally_mixed(fresh))?]);

        let dims = layout.dims();
        if dims.len() >= 2 && dims.iter().all(|&d| d == dims[0]) && self.treats_alike(layout) {
            let mut reversed: Vec<&str> = labels.clone();
            reversed.reverse();
            let mut perm = Vec::with_capacity(samples);
            for _ in 0..samples {
                let member = self.sample_member(layout, rng)?;
                // register contents move, labels stay where they were
                let moved = member.permute(&reversed)?.relabel(layout.clone())?;
                perm.push(self.membership(&moved)?);
            }
            tally("permutation", perm);
        }

        Ok(AxiomReport { family: self.name().into(), layout: layout.header(), tallies })
    }

    /// Whether every register of `layout` carries the same per-register data.
    fn treats_alike(&self, layout: &RegisterLayout) -> bool {
        let labels: Vec<&str> = layout.labels().into_iter().map(base_label).collect();
        match self {
            FreeSet::Gibbs { hamiltonians, .. } => {
                let h = |l: &str| hamiltonians.iter().find(|(k, _)| k == l).map(|(_, m)| m);
                let first = h(labels[0]);
                labels.iter().all(|l| match (h(l), first) {
                    (None, None) => true,
                    (Some(a), Some(b)) => a.nrows() == b.nrows() && linalg::max_abs_diff(a, b) == 0.0,
                    _ => false,
                })
            }
            FreeSet::Asymmetry { labels: acted, .. } if !acted.is_empty() => {
                let on = |l: &&str| acted.iter().any(|a| a == *l);
                labels.iter().all(on) || !labels.iter().any(on)
            }
            _ => true,
        }
    }
}
