use erasure_core::free_sets::FreeSet;
use erasure_core::linalg::{self, CMat, C64};
use erasure_core::qstate::random::{random_full_rank, random_pure, random_state};
use erasure_core::qstate::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn q(label: &str) -> RegisterLayout {
    RegisterLayout::single(label, 2).unwrap()
}

fn ket(label: &str, i: usize) -> DensityMatrix {
    DensityMatrix::basis(q(label), i).unwrap()
}

fn mixed(label: &str) -> DensityMatrix {
    DensityMatrix::maximally_mixed(q(label))
}

fn bell() -> DensityMatrix {
    let l = RegisterLayout::qubits(&["A", "B"]).unwrap();
    DensityMatrix::pure(l, &[C64::new(H, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(H, 0.0)]).unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Trace over the second factor of a `da·db` square matrix by explicit index sums.
fn trace_second_oracle(m: &CMat, da: usize, db: usize) -> Vec<Vec<C64>> {
    let mut out = vec![vec![C64::new(0.0, 0.0); da]; da];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            for k in 0..db {
                *cell += m[(i * db + k, j * db + k)];
            }
        }
    }
    out
}

#[test]
fn tensor_examples() {
    let t = mixed("A").tensor(&mixed("B")).unwrap();
    assert_eq!(t.layout().header(), "A:2 B:2");
    assert!(linalg::max_abs_diff(t.matrix(), &linalg::scale(&linalg::identity(4), 0.25)) < 1e-15);

    let p = ket("A", 0).tensor(&ket("B", 1)).unwrap();
    assert_eq!(p.rank().unwrap(), 1);
    assert!((p.entry(1, 1).re - 1.0).abs() < 1e-15);

    let mut r = rng(1);
    let rho = random_full_rank(&q("A"), &mut r);
    let sigma = random_full_rank(&q("B"), &mut r);
    let back = rho.tensor(&sigma).unwrap().partial_trace(&["B"]).unwrap();
    assert!(back.approx_eq(&rho, 1e-12));

    assert!(matches!(ket("A", 0).tensor(&ket("A", 1)), Err(erasure_core::Error::LabelCollision(_))));
}

#[test]
fn partial_trace_examples() {
    let half = bell().partial_trace(&["A"]).unwrap();
    assert!(half.approx_eq(&mixed("B"), 1e-12));
    assert!(bell().partial_trace(&["C"]).is_err());

    let mut r = rng(2);
    for _ in 0..10 {
        let rho = random_state(&RegisterLayout::qubits(&["A", "B"]).unwrap(), 3, &mut r).unwrap();
        let red = rho.partial_trace(&["B"]).unwrap();
        let oracle = trace_second_oracle(rho.matrix(), 2, 2);
        for (i, row) in oracle.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert!((red.entry(i, j) - v).norm() < 1e-13);
            }
        }
        assert!((red.trace() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn fidelity_and_purified_distance_examples() {
    let mut r = rng(3);
    let rho = random_full_rank(&q("M"), &mut r);
    assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-10);
    assert!(purified_distance(&rho, &rho).unwrap() < 1e-5);
    assert!(fidelity(&ket("M", 0), &ket("M", 1)).unwrap().abs() < 1e-12);
    assert!((purified_distance(&ket("M", 0), &ket("M", 1)).unwrap() - 1.0).abs() < 1e-12);
    // pure against mixed: F = sqrt(<0|I/2|0>)
    let closed = (mixed("M").entry(0, 0).re).sqrt();
    assert!((fidelity(&ket("M", 0), &mixed("M")).unwrap() - closed).abs() < 1e-12);
    assert!((purified_distance(&ket("M", 0), &mixed("M")).unwrap() - H).abs() < 1e-12);
    assert!(fidelity(&ket("M", 0), &ket("N", 0)).is_err());
}

#[test]
fn purification_examples() {
    let p = purify(&mixed("M"), "R").unwrap();
    assert_eq!(p.rank().unwrap(), 1);
    assert!(p.partial_trace(&["R"]).unwrap().approx_eq(&mixed("M"), 1e-12));
    assert!(p.partial_trace(&["M"]).unwrap().approx_eq(&mixed("R"), 1e-12));

    let small = purify_with(&ket("M", 1), "R", AncillaSize::Rank).unwrap();
    assert_eq!(small.layout().dim_of("R").unwrap(), 1);
    assert!(small.partial_trace(&["R"]).unwrap().approx_eq(&ket("M", 1), 1e-12));

    let mut r = rng(4);
    for _ in 0..5 {
        let rho = random_full_rank(&q("M"), &mut r);
        let spec = rho.eigenvalues().unwrap();
        let pur = purify(&rho, "R").unwrap();
        // Schmidt coefficients squared are the spectrum on either side
        let anc = pur.partial_trace(&["M"]).unwrap().eigenvalues().unwrap();
        for (a, b) in spec.iter().zip(&anc) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(pur.partial_trace(&["R"]).unwrap().approx_eq(&rho, 1e-10));
    }
}

#[test]
fn uhlmann_partner_examples() {
    let mut r = rng(5);
    let rho = random_full_rank(&q("A"), &mut r);
    let pure = purify(&rho, "R").unwrap();
    let same = uhlmann_partner(&pure, &rho).unwrap();
    assert!((fidelity(&same, &pure).unwrap() - 1.0).abs() < 1e-8);

    let zero = purify(&ket("A", 0), "R").unwrap();
    let partner = uhlmann_partner(&zero, &mixed("A")).unwrap();
    assert!((fidelity(&partner, &zero).unwrap() - H).abs() < 1e-8);
    assert!(partner.partial_trace(&["R"]).unwrap().approx_eq(&mixed("A"), 1e-10));

    for _ in 0..10 {
        let a = random_full_rank(&q("A"), &mut r);
        let theta = random_full_rank(&q("A"), &mut r);
        let pa = purify(&a, "R").unwrap();
        let u = uhlmann_partner(&pa, &theta).unwrap();
        // pure-state fidelity is |<psi|phi>|
        let (x, y) = (state_vector(&pa).unwrap(), state_vector(&u).unwrap());
        let overlap: C64 = x.iter().zip(&y).map(|(p, q)| p.conj() * q).sum();
        assert!((overlap.norm() - fidelity(&a, &theta).unwrap()).abs() < 1e-8);
        assert!(u.partial_trace(&["R"]).unwrap().approx_eq(&theta, 1e-9));
    }
}

#[test]
fn cq_extension_examples() {
    let mut r = rng(6);
    let rho_a = random_full_rank(&q("A"), &mut r);
    let sigma_a = random_full_rank(&q("A"), &mut r);
    let rho_ab = rho_a.tensor(&ket("B", 1)).unwrap();
    let ext = cq_extension(&rho_ab, &sigma_a, "B").unwrap();
    assert!(ext.approx_eq(&sigma_a.tensor(&ket("B", 1)).unwrap(), 1e-8));
    assert!((fidelity(&ext, &rho_ab).unwrap() - fidelity(&rho_a, &sigma_a).unwrap()).abs() < 1e-8);

    let same = cq_extension(&rho_ab, &rho_a, "B").unwrap();
    assert!((fidelity(&same, &rho_ab).unwrap() - 1.0).abs() < 1e-8);

    for _ in 0..10 {
        let parts: Vec<DensityMatrix> =
            (0..2).map(|b| random_full_rank(&q("A"), &mut r).tensor(&ket("B", b)).unwrap()).collect();
        let w: f64 = rand::Rng::gen_range(&mut r, 0.1..0.9);
        let cq = DensityMatrix::mixture(&[(w, &parts[0]), (1.0 - w, &parts[1])]).unwrap();
        let sigma = random_full_rank(&q("A"), &mut r);
        let ext = cq_extension(&cq, &sigma, "B").unwrap();
        assert!(ext.is_classical_on("B").unwrap());
        assert!(ext.partial_trace(&["B"]).unwrap().approx_eq(&sigma, 1e-8));
        let target = fidelity(&cq.partial_trace(&["B"]).unwrap(), &sigma).unwrap();
        assert!((fidelity(&cq, &ext).unwrap() - target).abs() < 1e-6);
    }

    assert!(matches!(cq_extension(&bell(), &mixed("A"), "B"), Err(erasure_core::Error::NotClassical { .. })));
}

#[test]
fn controlled_swap_examples() {
    let l = RegisterLayout::new([("M", 2), ("N", 2), ("J", 1)]).unwrap();
    let plain = controlled_swap_single(&l, "J", "M", &["N"]).unwrap();
    let swap = UnitaryOp::swap_registers(&l, &["M"], &["N"]).unwrap();
    assert!(linalg::max_abs_diff(&plain.matrix(), &swap.matrix()) < 1e-15);

    let mut r = rng(7);
    let rho = random_full_rank(&q("M"), &mut r);
    let sigma = random_full_rank(&q("M"), &mut r);
    let input = rho
        .tensor(&sigma.relabel(q("M1")).unwrap())
        .unwrap()
        .tensor(&sigma.relabel(q("M2")).unwrap())
        .unwrap()
        .tensor(&mixed("J"))
        .unwrap();
    let op = controlled_swap_single(input.layout(), "J", "M", &["M1", "M2"]).unwrap();
    assert!(op.unitarity_error() < 1e-12);
    let twice = op.compose(&op).unwrap();
    assert!(linalg::max_abs_diff(&twice.matrix(), &linalg::identity(16)) < 1e-12);
    let out = op.apply(&input).unwrap();
    let want = DensityMatrix::mixture(&[(0.5, &rho), (0.5, &sigma)]).unwrap();
    assert!(out.reduced(&["M1"]).unwrap().relabel(q("M")).unwrap().approx_eq(&want, 1e-12));

    // a diagonal input stays diagonal
    let diag = DensityMatrix::diagonal(
        input.layout().clone(),
        &random_full_rank(&input.layout().clone(), &mut r).diagonal_probs(),
    )
    .unwrap();
    assert!(FreeSet::Coherence.membership(&op.apply(&diag).unwrap()).unwrap());

    let bad = RegisterLayout::new([("M", 2), ("N", 3), ("J", 1)]).unwrap();
    assert!(controlled_swap_single(&bad, "J", "M", &["N"]).is_err());
    assert!(controlled_swap_single(&l, "J", "M", &["N", "N"]).is_err());
}

#[test]
fn dominance_examples() {
    let mut r = rng(8);
    let cq = DensityMatrix::mixture(&[
        (0.3, &random_full_rank(&q("A"), &mut r).tensor(&ket("B", 0)).unwrap()),
        (0.7, &random_full_rank(&q("A"), &mut r).tensor(&ket("B", 1)).unwrap()),
    ])
    .unwrap();
    assert!(dominance_check(&cq, &marginal_support_bound(&cq, &["B"]).unwrap(), 1.0).unwrap());

    let any = random_state(&RegisterLayout::qubits(&["A", "B"]).unwrap(), 4, &mut r).unwrap();
    assert!(dominance_check(&any, &marginal_support_bound(&any, &["B"]).unwrap(), 2.0).unwrap());

    let b = bell();
    let bound = marginal_support_bound(&b, &["B"]).unwrap();
    let oracle = linalg::eigvalsh(&linalg::sub(&bound, b.matrix())).unwrap();
    assert!(oracle[0] < -0.1);
    assert!(!dominance_check(&b, &bound, 1.0).unwrap());
}

#[test]
fn text_format_round_trip_is_bit_faithful() {
    let mut r = rng(9);
    let l = RegisterLayout::new([("A", 2), ("B", 3)]).unwrap();
    for _ in 0..5 {
        let rho = random_pure(&l, &mut r);
        let back = DensityMatrix::from_text(&rho.to_text()).unwrap();
        assert_eq!(back.layout(), rho.layout());
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(back.entry(i, j).re.to_bits(), rho.entry(i, j).re.to_bits());
                assert_eq!(back.entry(i, j).im.to_bits(), rho.entry(i, j).im.to_bits());
            }
        }
    }
    assert!(DensityMatrix::from_text("layout A:2\n1,0 0,0\n").is_err());
    assert!(DensityMatrix::from_text("1,0").is_err());
}
