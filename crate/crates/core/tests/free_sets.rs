use erasure_core::entropies::{dmax, relative_entropy, smooth_dmax};
use erasure_core::free_sets::FreeSet;
use erasure_core::linalg::{self, C64};
use erasure_core::qstate::random::random_diagonal;
use erasure_core::qstate::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn q(label: &str) -> RegisterLayout {
    RegisterLayout::single(label, 2).unwrap()
}

fn plus() -> DensityMatrix {
    DensityMatrix::pure(q("M"), &[C64::new(H, 0.0), C64::new(H, 0.0)]).unwrap()
}

fn bell() -> DensityMatrix {
    let z = C64::new(0.0, 0.0);
    DensityMatrix::pure(RegisterLayout::qubits(&["A", "B"]).unwrap(), &[C64::new(H, 0.0), z, z, C64::new(H, 0.0)])
        .unwrap()
}

fn phase_group() -> Vec<linalg::CMat> {
    vec![linalg::identity(2), linalg::diag_real(&[1.0, -1.0])]
}

fn families() -> Vec<FreeSet> {
    vec![
        FreeSet::Coherence,
        FreeSet::Uniformity,
        FreeSet::Gibbs { beta: 1.0, hamiltonians: vec![("E".into(), linalg::diag_real(&[0.0, 1.0]))], base2: true },
        FreeSet::Asymmetry { group: phase_group(), labels: vec![] },
        FreeSet::separable(&["A"]),
        FreeSet::SharedRandomness { parties: 2 },
    ]
}

#[test]
fn maximally_mixed_is_free_everywhere() {
    let two = RegisterLayout::qubits(&["A", "B"]).unwrap();
    for f in families() {
        assert!(f.membership(&DensityMatrix::maximally_mixed(two.clone())).unwrap(), "{}", f.name());
    }
}

#[test]
fn resourceful_states_are_rejected() {
    assert!(!FreeSet::Coherence.membership(&plus()).unwrap());
    let pt = bell().partial_transpose(&["A"]).unwrap();
    assert!((linalg::eigvalsh(&pt).unwrap()[0] + 0.5).abs() < 1e-12);
    assert!(!FreeSet::separable(&["A"]).membership(&bell()).unwrap());
    assert!(!FreeSet::Uniformity.membership(&DensityMatrix::basis(q("M"), 0).unwrap()).unwrap());
    assert!(!FreeSet::Asymmetry { group: phase_group(), labels: vec![] }.membership(&plus()).unwrap());
}

#[test]
fn unsupported_families_say_so() {
    for f in [FreeSet::Contextuality, FreeSet::Stabilizer] {
        assert!(matches!(f.membership(&plus()), Err(erasure_core::Error::Unsupported(_))));
    }
}

#[test]
fn coherence_relent_of_plus_matches_diagonal_grid() {
    let (sigma, est) = FreeSet::Coherence.closest_free_relent(&plus()).unwrap();
    let grid = (1..1000)
        .map(|i| {
            let p = i as f64 / 1000.0;
            relative_entropy(&plus(), &DensityMatrix::diagonal(q("M"), &[p, 1.0 - p]).unwrap()).unwrap().value
        })
        .fold(f64::INFINITY, f64::min);
    assert!((est.value - grid).abs() < 1e-6);
    assert!((est.value - 1.0).abs() < 1e-9);
    assert!(sigma.approx_eq(&DensityMatrix::maximally_mixed(q("M")), 1e-9));
}

#[test]
fn uniformity_relent_of_pure_qubit_is_one() {
    let (_, est) = FreeSet::Uniformity.closest_free_relent(&DensityMatrix::basis(q("M"), 1).unwrap()).unwrap();
    assert!((est.value - 1.0).abs() < 1e-9);
}

#[test]
fn ppt_relent_of_bell_matches_isotropic_oracle() {
    // twirling reduces the search to w·Φ + (1−w)(I−Φ)/3, PPT for w ≤ 1/2
    let phi = bell();
    let rest = linalg::scale(&linalg::sub(&linalg::identity(4), phi.matrix()), 1.0 / 3.0);
    let oracle = (1..=500)
        .map(|i| {
            let w = i as f64 / 1000.0;
            let m = linalg::lincomb(phi.matrix(), w, &rest, 1.0 - w);
            relative_entropy(&phi, &DensityMatrix::new(phi.layout().clone(), m).unwrap()).unwrap().value
        })
        .fold(f64::INFINITY, f64::min);
    assert!((oracle - 1.0).abs() < 1e-9);
    let (sigma, est) = FreeSet::separable(&["A"]).closest_free_relent(&phi).unwrap();
    assert!(FreeSet::separable(&["A"]).membership(&sigma).unwrap());
    assert!((est.value - oracle).abs() < 1e-4, "{}", est.value);
    assert!(est.lower_bound.unwrap() <= est.value + 1e-9);
}

#[test]
fn members_are_their_own_closest_free_state() {
    let mut r = ChaCha8Rng::seed_from_u64(11);
    let two = RegisterLayout::qubits(&["A", "B"]).unwrap();
    for f in families() {
        let s = f.sample_member(&two, &mut r).unwrap();
        let (sigma, est) = f.closest_free_relent(&s).unwrap();
        assert!(est.value.abs() < 1e-6, "{}: {}", f.name(), est.value);
        assert!(sigma.approx_eq(&s, 1e-3), "{}", f.name());
    }
}

#[test]
fn smooth_dmax_examples() {
    let mut r = ChaCha8Rng::seed_from_u64(12);
    let free = random_diagonal(&q("M"), &mut r);
    let (sigma, est) = FreeSet::Coherence.closest_free_smooth_dmax(&free, 0.1).unwrap();
    assert!(est.value.abs() < 1e-6);
    assert!(sigma.approx_eq(&free, 1e-6));

    let pure = DensityMatrix::basis(q("M"), 0).unwrap();
    let (_, u) = FreeSet::Uniformity.closest_free_smooth_dmax(&pure, 0.0).unwrap();
    let exact = dmax(&pure, &DensityMatrix::maximally_mixed(q("M"))).unwrap().value;
    assert!((u.value - exact).abs() < 1e-9 && (exact - 1.0).abs() < 1e-9);

    let (_, c) = FreeSet::Coherence.closest_free_smooth_dmax(&plus(), 0.1).unwrap();
    let lower = c.lower_bound.unwrap();
    assert!(lower <= c.value + 1e-9 && c.value - lower <= 0.05, "[{lower}, {}]", c.value);
    let oracle = (1..100)
        .map(|i| {
            let p = i as f64 / 100.0;
            smooth_dmax(&plus(), &DensityMatrix::diagonal(q("M"), &[p, 1.0 - p]).unwrap(), 0.1).unwrap().value
        })
        .fold(f64::INFINITY, f64::min);
    assert!((c.value - oracle).abs() <= 0.05, "{} vs grid {oracle}", c.value);
}

#[test]
fn regularized_sequences() {
    let mut r = ChaCha8Rng::seed_from_u64(13);
    let rho = erasure_core::qstate::random::random_full_rank(&q("M"), &mut r);
    let entropy: f64 = -rho.eigenvalues().unwrap().iter().filter(|&&x| x > 0.0).map(|x| x * x.log2()).sum::<f64>();
    for e in FreeSet::Uniformity.regularized_e(&rho, 3).unwrap() {
        assert!((e.value - (1.0 - entropy)).abs() < 1e-9);
    }
    for e in FreeSet::Coherence.regularized_e(&plus(), 2).unwrap() {
        assert!((e.value - 1.0).abs() < 1e-6);
    }
    let bell1 = FreeSet::separable(&["A"]).regularized_e(&bell(), 1).unwrap();
    assert!(bell1[0].value >= 1.0 - 1e-6);
    assert!(matches!(FreeSet::Coherence.regularized_e(&bell(), 7), Err(erasure_core::Error::DimensionOverflow { .. })));
}

#[test]
fn c_constant_examples() {
    assert!((FreeSet::Uniformity.c_constant(&q("M"), 2).unwrap() - 1.0).abs() < 1e-12);
    let grid = (1..1000)
        .map(|i| {
            let p = i as f64 / 1000.0;
            p.log2().abs().max((1.0 - p).log2().abs())
        })
        .fold(f64::INFINITY, f64::min);
    assert!((FreeSet::Coherence.c_constant(&q("M"), 2).unwrap() - grid).abs() < 1e-9);

    let gibbs =
        FreeSet::Gibbs { beta: 1.0, hamiltonians: vec![("M".into(), linalg::diag_real(&[0.0, 1.0]))], base2: true };
    let c = gibbs.c_constant(&q("M"), 2).unwrap();
    let bound = 1.0 + (1.0f64 + 0.5).log2();
    // ρ_β = diag(1, 1/2)/(3/2), so ‖log ρ_β‖_∞ = log2(3)
    assert!((c - 3f64.log2()).abs() < 1e-9);
    assert!(c <= bound + 1e-12);
}

#[test]
fn block_structure_examples() {
    let layout = RegisterLayout::new([("M", 2), ("J", 2)]).unwrap();
    let m = q("M");
    let mut r = ChaCha8Rng::seed_from_u64(14);
    let samples: Vec<DensityMatrix> = (0..5).map(|_| random_diagonal(&m, &mut r)).collect();

    let id = UnitaryOp::from_blocks(&[UnitaryOp::identity(m.clone()), UnitaryOp::identity(m.clone())], "J").unwrap();
    assert!(FreeSet::Coherence.block_structure_check(&id, "J", &samples).unwrap());

    let flip = UnitaryOp::permutation(m.clone(), vec![1, 0]).unwrap();
    let perm = UnitaryOp::from_blocks(&[UnitaryOp::identity(m.clone()), flip], "J").unwrap();
    assert!(FreeSet::Coherence.block_structure_check(&perm, "J", &samples).unwrap());

    let had = linalg::scale(&linalg::CMat::from_fn(2, 2, |i, j| C64::new(if i * j == 1 { -1.0 } else { 1.0 }, 0.0)), H);
    let mixing = UnitaryOp::from_matrix(layout, linalg::kron(&linalg::identity(2), &had)).unwrap();
    assert!(!FreeSet::Coherence.block_structure_check(&mixing, "J", &samples).unwrap());
}
