//! Free-state families: membership, projections, support functions and the
//! closest-free-state optimizers behind the resource measures.

mod axioms;
mod optimize;
mod ppt;
mod smooth;
mod structure;

use faer::Mat;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::qstate::random::{random_full_rank, random_probs, random_pure};
use crate::qstate::{base_label, reorder_matrix, DensityMatrix, RegisterLayout, DEFAULT_TOLERANCE};

pub use axioms::{AxiomReport, AxiomTally};
pub use optimize::OptimOptions;
pub use smooth::SmoothFreeOptions;
pub use structure::{SharedRandomnessState, MAX_REGULARIZED_DIM};

/// Family names as they appear in configuration files and reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Coherence,
    Uniformity,
    Gibbs,
    Asymmetry,
    #[serde(rename = "separable-2qubit")]
    Separable,
    #[serde(rename = "shared-randomness-multiparty")]
    SharedRandomness,
    Contextuality,
    Stabilizer,
}

impl FamilyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FamilyKind::Coherence => "coherence",
            FamilyKind::Uniformity => "uniformity",
            FamilyKind::Gibbs => "gibbs",
            FamilyKind::Asymmetry => "asymmetry",
            FamilyKind::Separable => "separable-2qubit",
            FamilyKind::SharedRandomness => "shared-randomness-multiparty",
            FamilyKind::Contextuality => "contextuality",
            FamilyKind::Stabilizer => "stabilizer",
        }
    }
}

/// A free-state family over labeled registers.
///
/// Per-register data is keyed by base label, so copies `M#1, M#2, …` of a register
/// `M` share the data of `M`.
#[derive(Clone, Debug)]
pub enum FreeSet {
    /// States diagonal in the computational basis of every register.
    Coherence,
    /// Only the maximally mixed state.
    Uniformity,
    /// Only the product of local Gibbs states. Registers without a Hamiltonian
    /// carry `H = 0`. With `base2` the exponential is `2^{−βH}`, otherwise `e^{−βH}`.
    Gibbs {
        beta: f64,
        hamiltonians: Vec<(String, CMat)>,
        base2: bool,
    },
    /// States invariant under a finite group acting as `U_g ⊗ U_g ⊗ …` on the
    /// registers whose base label is listed (all registers of the group's
    /// dimension when `labels` is empty).
    Asymmetry {
        group: Vec<CMat>,
        labels: Vec<String>,
    },
    /// PPT states across the cut (party A registers | the rest). Exact for
    /// 2×2 and 2×3; larger cuts need `ppt_relaxation`.
    Separable {
        party_a: Vec<String>,
        ppt_relaxation: bool,
    },
    /// Classically correlated states: diagonal in the product computational basis.
    SharedRandomness {
        parties: usize,
    },
    Contextuality,
    Stabilizer,
}

/// Outcome of a support-function evaluation `max_{σ∈F} Tr Wσ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Support {
    pub value: f64,
    /// Whether `value` is the maximum itself rather than an upper bound on it.
    pub exact: bool,
}

impl FreeSet {
    pub fn kind(&self) -> FamilyKind {
        match self {
            FreeSet::Coherence => FamilyKind::Coherence,
            FreeSet::Uniformity => FamilyKind::Uniformity,
            FreeSet::Gibbs { .. } => FamilyKind::Gibbs,
            FreeSet::Asymmetry { .. } => FamilyKind::Asymmetry,
            FreeSet::Separable { .. } => FamilyKind::Separable,
            FreeSet::SharedRandomness { .. } => FamilyKind::SharedRandomness,
            FreeSet::Contextuality => FamilyKind::Contextuality,
            FreeSet::Stabilizer => FamilyKind::Stabilizer,
        }
    }

    pub fn name(&self) -> &'static str {
        self.kind().as_str()
    }

    pub fn separable(party_a: &[&str]) -> Self {
        FreeSet::Separable { party_a: party_a.iter().map(|s| s.to_string()).collect(), ppt_relaxation: false }
    }

    pub fn gibbs(beta: f64, hamiltonians: Vec<(String, CMat)>) -> Self {
        FreeSet::Gibbs { beta, hamiltonians, base2: false }
    }

    /// The same family with the PPT relaxation switched on (other families unchanged).
    pub fn relaxed(&self) -> Self {
        match self {
            FreeSet::Separable { party_a, .. } => FreeSet::Separable { party_a: party_a.clone(), ppt_relaxation: true },
            other => other.clone(),
        }
    }

    pub fn check_supported(&self) -> Result<()> {
        match self {
            FreeSet::Contextuality => Err(Error::Unsupported(
                "contextuality is phrased with conditional probability tables, not density matrices".into(),
            )),
            FreeSet::Stabilizer => {
                Err(Error::Unsupported("stabilizer states need Clifford-group machinery that is not provided".into()))
            }
            FreeSet::Gibbs { beta, hamiltonians, .. } => {
                if !beta.is_finite() || *beta < 0.0 {
                    return Err(Error::domain(format!("inverse temperature {beta} must be finite and >= 0")));
                }
                for (label, h) in hamiltonians {
                    if h.nrows() != h.ncols() || linalg::hermiticity_error(h) > 1e-10 {
                        return Err(Error::Config(format!("Hamiltonian for `{label}` is not Hermitian")));
                    }
                }
                Ok(())
            }
            FreeSet::Asymmetry { group, .. } => {
                let d = group.first().map(|g| g.nrows()).ok_or_else(|| Error::Config("empty group".into()))?;
                for g in group {
                    if g.nrows() != d || g.ncols() != d {
                        return Err(Error::DimensionMismatch { expected: d, got: g.nrows() });
                    }
                    let err = linalg::max_abs_diff(&(g.adjoint() * g), &linalg::identity(d));
                    if err > 1e-10 {
                        return Err(Error::NotUnitary(err));
                    }
                }
                Ok(())
            }
            FreeSet::SharedRandomness { parties } if *parties < 1 => {
                Err(Error::domain("shared randomness needs at least one party"))
            }
            _ => Ok(()),
        }
    }

    fn is_singleton(&self) -> bool {
        matches!(self, FreeSet::Uniformity | FreeSet::Gibbs { .. })
    }

    fn is_diagonal_family(&self) -> bool {
        matches!(self, FreeSet::Coherence | FreeSet::SharedRandomness { .. })
    }

    /// Local Gibbs state of one register.
    fn gibbs_local(&self, label: &str, dim: usize) -> Result<CMat> {
        let FreeSet::Gibbs { beta, hamiltonians, base2 } = self else {
            unreachable!("only called on the Gibbs family")
        };
        let Some((_, h)) = hamiltonians.iter().find(|(l, _)| l == base_label(label)) else {
            return Ok(linalg::scale(&linalg::identity(dim), 1.0 / dim as f64));
        };
        if h.nrows() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: h.nrows() });
        }
        let e = linalg::eigh(h)?;
        let scale = if *base2 { std::f64::consts::LN_2 } else { 1.0 };
        // shift by the ground energy so the exponentials stay bounded
        let e0 = e.min();
        let g = e.apply(|x| (-beta * scale * (x - e0)).exp());
        let z = linalg::trace(&g).re;
        Ok(linalg::scale(&g, 1.0 / z))
    }

    /// Eigenvalues of the local Gibbs state of one register.
    fn gibbs_local_spectrum(&self, label: &str, dim: usize) -> Result<Vec<f64>> {
        linalg::eigvalsh(&self.gibbs_local(label, dim)?)
    }

    /// The unique member for singleton families.
    pub fn singleton(&self, layout: &RegisterLayout) -> Result<Option<DensityMatrix>> {
        match self {
            FreeSet::Uniformity => Ok(Some(DensityMatrix::maximally_mixed(layout.clone()))),
            FreeSet::Gibbs { .. } => {
                let mut m = linalg::identity(1);
                for r in layout.factors() {
                    m = linalg::kron(&m, &self.gibbs_local(&r.label, r.dim)?);
                }
                Ok(Some(DensityMatrix::with_tolerance(layout.clone(), linalg::hermitian_part(&m), DEFAULT_TOLERANCE)?))
            }
            _ => Ok(None),
        }
    }

    /// Full-space representation `U_g ⊗ U_g ⊗ …` for every group element.
    fn group_on(&self, layout: &RegisterLayout) -> Result<Vec<CMat>> {
        let FreeSet::Asymmetry { group, labels } = self else { unreachable!("only called on the asymmetry family") };
        let gd = group[0].nrows();
        let acts: Vec<bool> = layout
            .factors()
            .iter()
            .map(|r| if labels.is_empty() { r.dim == gd } else { labels.iter().any(|l| l == base_label(&r.label)) })
            .collect();
        for (r, &a) in layout.factors().iter().zip(&acts) {
            if a && r.dim != gd {
                return Err(Error::DimensionMismatch { expected: gd, got: r.dim });
            }
        }
        let mut out = Vec::with_capacity(group.len());
        for g in group {
            let mut m = linalg::identity(1);
            for (r, &a) in layout.factors().iter().zip(&acts) {
                let f = if a { g.clone() } else { linalg::identity(r.dim) };
                m = linalg::kron(&m, &f);
            }
            out.push(m);
        }
        Ok(out)
    }

    /// Uniform group average `(1/|G|) Σ_g U_g X U_g†`.
    pub fn twirl(&self, layout: &RegisterLayout, x: &CMat) -> Result<CMat> {
        let reps = self.group_on(layout)?;
        let d = layout.dim();
        let mut acc = linalg::zeros(d, d);
        for u in &reps {
            acc = linalg::add(&acc, &(u * x * u.adjoint()));
        }
        Ok(linalg::scale(&acc, 1.0 / reps.len() as f64))
    }

    /// Labels of party A and the dimensions `(d_A, d_B)` of the cut.
    fn cut<'a>(&self, layout: &'a RegisterLayout) -> (Vec<&'a str>, usize, usize) {
        let FreeSet::Separable { party_a, .. } = self else { unreachable!("only called on the separable family") };
        let mut a = Vec::new();
        let (mut da, mut db) = (1, 1);
        for r in layout.factors() {
            if party_a.iter().any(|l| l == base_label(&r.label)) {
                a.push(r.label.as_str());
                da *= r.dim;
            } else {
                db *= r.dim;
            }
        }
        (a, da, db)
    }

    /// Whether PPT coincides with separability on this cut.
    fn ppt_exact(da: usize, db: usize) -> bool {
        da.min(db) == 1 || da * db <= 6
    }

    fn require_ppt_ok(&self, layout: &RegisterLayout) -> Result<(Vec<String>, usize, usize)> {
        let (a, da, db) = self.cut(layout);
        let relaxed = matches!(self, FreeSet::Separable { ppt_relaxation: true, .. });
        if !Self::ppt_exact(da, db) && !relaxed {
            return Err(Error::Unsupported(format!(
                "PPT is not separability on a {da}x{db} cut; enable ppt_relaxation to use PPT states"
            )));
        }
        Ok((a.into_iter().map(String::from).collect(), da, db))
    }

    /// Whether `sigma` belongs to the family, within the state's tolerance.
    pub fn membership(&self, sigma: &DensityMatrix) -> Result<bool> {
        self.check_supported()?;
        let tol = sigma.tolerance().max(1e-12);
        let layout = sigma.layout();
        match self {
            FreeSet::Coherence | FreeSet::SharedRandomness { .. } => Ok(sigma.off_diagonal_mass() <= tol),
            FreeSet::Uniformity | FreeSet::Gibbs { .. } => {
                let s = self.singleton(layout)?.expect("singleton family");
                Ok(linalg::max_abs_diff(sigma.matrix(), s.matrix()) <= tol)
            }
            FreeSet::Asymmetry { .. } => {
                for u in self.group_on(layout)? {
                    let moved = &u * sigma.matrix() * u.adjoint();
                    if linalg::max_abs_diff(&moved, sigma.matrix()) > tol {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            FreeSet::Separable { .. } => {
                let (a, da, db) = self.require_ppt_ok(layout)?;
                if da == 1 || db == 1 {
                    return Ok(true);
                }
                let refs: Vec<&str> = a.iter().map(String::as_str).collect();
                let pt = sigma.partial_transpose(&refs)?;
                Ok(linalg::eigvalsh(&pt)?.first().copied().unwrap_or(0.0) >= -tol)
            }
            FreeSet::Contextuality | FreeSet::Stabilizer => unreachable!("rejected above"),
        }
    }

    /// Frobenius-nearest member to a Hermitian matrix on `layout`.
    pub fn project(&self, layout: &RegisterLayout, x: &CMat) -> Result<CMat> {
        self.check_supported()?;
        let d = layout.dim();
        if x.nrows() != d || x.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: x.nrows() });
        }
        match self {
            FreeSet::Coherence | FreeSet::SharedRandomness { .. } => {
                let diag: Vec<f64> = (0..d).map(|i| x[(i, i)].re).collect();
                Ok(linalg::diag_real(&linalg::project_simplex(&diag)))
            }
            FreeSet::Uniformity | FreeSet::Gibbs { .. } => {
                Ok(self.singleton(layout)?.expect("singleton family").into_matrix())
            }
            FreeSet::Asymmetry { .. } => {
                // the twirl is the orthogonal projection onto the commutant, and the
                // spectral projection onto states preserves the commutant
                let t = self.twirl(layout, &linalg::hermitian_part(x))?;
                linalg::project_density(&t)
            }
            FreeSet::Separable { .. } => {
                let (a, da, db) = self.require_ppt_ok(layout)?;
                let h = linalg::hermitian_part(x);
                if da == 1 || db == 1 {
                    return linalg::project_density(&h);
                }
                let refs: Vec<&str> = a.iter().map(String::as_str).collect();
                ppt::project_ppt(layout, &h, &refs)
            }
            FreeSet::Contextuality | FreeSet::Stabilizer => unreachable!("rejected above"),
        }
    }

    /// `max_{σ∈F} Tr Wσ` for Hermitian `W`, or an upper bound when marked inexact.
    pub fn support_function(&self, layout: &RegisterLayout, w: &CMat) -> Result<Support> {
        self.check_supported()?;
        let d = layout.dim();
        if w.nrows() != d || w.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: w.nrows() });
        }
        let exact = |value| Ok(Support { value, exact: true });
        match self {
            FreeSet::Coherence | FreeSet::SharedRandomness { .. } => {
                exact((0..d).map(|i| w[(i, i)].re).fold(f64::NEG_INFINITY, f64::max))
            }
            FreeSet::Uniformity | FreeSet::Gibbs { .. } => {
                let s = self.singleton(layout)?.expect("singleton family");
                exact(linalg::inner_re(w, s.matrix()))
            }
            FreeSet::Asymmetry { .. } => {
                let t = self.twirl(layout, &linalg::hermitian_part(w))?;
                exact(linalg::eigh(&t)?.max())
            }
            FreeSet::Separable { .. } => {
                let (a, da, db) = self.require_ppt_ok(layout)?;
                let h = linalg::hermitian_part(w);
                if da == 1 || db == 1 {
                    return exact(linalg::eigh(&h)?.max());
                }
                let refs: Vec<&str> = a.iter().map(String::as_str).collect();
                if !Self::ppt_exact(da, db) {
                    // PPT states strictly contain the separable ones here
                    return Ok(Support { value: ppt::ppt_support_bound(layout, &h, &refs)?, exact: false });
                }
                let ordered = split_order(layout, &refs)?;
                let m = reorder_matrix(layout, &h, &ordered)?;
                exact(ppt::max_product_expectation(&m, da, db)?)
            }
            FreeSet::Contextuality | FreeSet::Stabilizer => unreachable!("rejected above"),
        }
    }

    /// Like [`FreeSet::support_function`], with a slower and tighter bound on the
    /// relaxed cuts. `floor` is a value known to be attained by some member.
    pub(crate) fn support_certificate(&self, layout: &RegisterLayout, w: &CMat, floor: f64) -> Result<f64> {
        let s = self.support_function(layout, w)?;
        if s.exact {
            return Ok(s.value);
        }
        let (a, _, _) = self.require_ppt_ok(layout)?;
        let refs: Vec<&str> = a.iter().map(String::as_str).collect();
        Ok(ppt::ppt_support_bound_refined(layout, &linalg::hermitian_part(w), &refs, floor)?.min(s.value))
    }

    /// `inf_{τ∈F} ‖log₂ τ‖_∞`, `+∞` when every member is rank deficient.
    pub fn inf_log_norm(&self, layout: &RegisterLayout) -> Result<f64> {
        self.check_supported()?;
        match self {
            FreeSet::Gibbs { .. } => {
                let mut total = 0.0;
                for r in layout.factors() {
                    let min = self.gibbs_local_spectrum(&r.label, r.dim)?.first().copied().unwrap_or(1.0);
                    if min <= 0.0 {
                        return Ok(f64::INFINITY);
                    }
                    total -= min.log2();
                }
                Ok(total)
            }
            // every eigenvalue of a d-dimensional state is at most 1, and the
            // smallest is at most 1/d, so I/d is optimal whenever it is free
            _ => Ok((layout.dim() as f64).log2()),
        }
    }

    /// `min_{n ≤ n_max} (1/n) inf_{τ∈F_n} ‖log₂ τ‖_∞` over `n` copies of `layout`.
    pub fn c_constant(&self, layout: &RegisterLayout, n_max: usize) -> Result<f64> {
        if n_max == 0 {
            return Err(Error::domain("c_constant needs n_max >= 1"));
        }
        let mut best = f64::INFINITY;
        for n in 1..=n_max {
            best = best.min(self.inf_log_norm(&layout.power(n)?)? / n as f64);
        }
        Ok(best)
    }

    /// A random member on `layout`.
    pub fn sample_member<R: Rng + ?Sized>(&self, layout: &RegisterLayout, rng: &mut R) -> Result<DensityMatrix> {
        self.check_supported()?;
        let d = layout.dim();
        match self {
            FreeSet::Coherence | FreeSet::SharedRandomness { .. } => {
                DensityMatrix::diagonal(layout.clone(), &random_probs(d, rng))
            }
            FreeSet::Uniformity | FreeSet::Gibbs { .. } => Ok(self.singleton(layout)?.expect("singleton family")),
            FreeSet::Asymmetry { .. } => {
                let r = random_full_rank(layout, rng);
                let t = self.twirl(layout, r.matrix())?;
                DensityMatrix::new(layout.clone(), linalg::hermitian_part(&t))
            }
            FreeSet::Separable { .. } => {
                let (a, da, db) = self.cut(layout);
                let refs: Vec<&str> = a.clone();
                let ordered = split_order(layout, &refs)?;
                let la = RegisterLayout::single("a", da)?;
                let lb = RegisterLayout::single("b", db)?;
                let k = 1 + rng.gen_range(0..4);
                let w = random_probs(k, rng);
                let mut m = linalg::zeros(d, d);
                for wi in w {
                    let pa = random_pure(&la, rng);
                    let pb = random_pure(&lb, rng);
                    m = linalg::add(&m, &linalg::scale(&linalg::kron(pa.matrix(), pb.matrix()), wi));
                }
                let back = reorder_matrix(&ordered, &m, layout)?;
                DensityMatrix::new(layout.clone(), linalg::hermitian_part(&back))
            }
            FreeSet::Contextuality | FreeSet::Stabilizer => unreachable!("rejected above"),
        }
    }
}

/// `layout` reordered with the listed labels first.
pub(crate) fn split_order(layout: &RegisterLayout, first: &[&str]) -> Result<RegisterLayout> {
    let mut order: Vec<&str> = first.to_vec();
    order.extend(layout.labels().into_iter().filter(|l| !first.contains(l)));
    layout.reordered(&order)
}

/// Dense matrix from a closure, for building group elements and Hamiltonians.
pub fn matrix_from_fn(d: usize, f: impl Fn(usize, usize) -> linalg::C64) -> CMat {
    Mat::from_fn(d, d, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn qubit() -> RegisterLayout {
        RegisterLayout::single("M", 2).unwrap()
    }

    fn bell() -> DensityMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::pure(RegisterLayout::qubits(&["A", "B"]).unwrap(), &[re(h), re(0.0), re(0.0), re(h)]).unwrap()
    }

    #[test]
    fn plus_state_is_not_incoherent() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DensityMatrix::pure(qubit(), &[re(h), re(h)]).unwrap();
        assert!(!FreeSet::Coherence.membership(&plus).unwrap());
        assert!(FreeSet::Coherence.membership(&DensityMatrix::maximally_mixed(qubit())).unwrap());
    }

    #[test]
    fn bell_is_not_ppt() {
        let f = FreeSet::separable(&["A"]);
        assert!(!f.membership(&bell()).unwrap());
        let mm = DensityMatrix::maximally_mixed(RegisterLayout::qubits(&["A", "B"]).unwrap());
        assert!(f.membership(&mm).unwrap());
    }

    #[test]
    fn large_cut_needs_relaxation() {
        let b2 = bell().tensor(&bell().relabel(RegisterLayout::qubits(&["A#2", "B#2"]).unwrap()).unwrap()).unwrap();
        let f = FreeSet::separable(&["A"]);
        assert!(matches!(f.membership(&b2), Err(Error::Unsupported(_))));
        assert!(!f.relaxed().membership(&b2).unwrap());
    }

    #[test]
    fn gibbs_base2_log_norm() {
        let h = linalg::diag_real(&[0.0, 1.0]);
        let f = FreeSet::Gibbs { beta: 1.0, hamiltonians: vec![("M".into(), h)], base2: true };
        let v = f.inf_log_norm(&qubit()).unwrap();
        assert!((v - 3f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn contextuality_is_unsupported() {
        let s = DensityMatrix::maximally_mixed(qubit());
        assert!(matches!(FreeSet::Contextuality.membership(&s), Err(Error::Unsupported(_))));
        assert!(matches!(FreeSet::Stabilizer.inf_log_norm(&qubit()), Err(Error::Unsupported(_))));
    }

    #[test]
    fn separable_samples_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = FreeSet::separable(&["A"]);
        let l = RegisterLayout::new([("B", 3), ("A", 2)]).unwrap();
        for _ in 0..20 {
            let s = f.sample_member(&l, &mut rng).unwrap();
            assert!(f.membership(&s).unwrap());
        }
    }

    #[test]
    fn product_support_matches_bell_overlap() {
        let f = FreeSet::separable(&["A"]);
        let b = bell();
        let s = f.support_function(b.layout(), b.matrix()).unwrap();
        assert!(s.exact);
        assert!((s.value - 0.5).abs() < 1e-9, "{}", s.value);
    }
}
