use erasure_core::entropies::*;
use erasure_core::linalg::{self, re};
use erasure_core::qstate::random::{random_diagonal, random_full_rank, random_state};
use erasure_core::qstate::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn qubit() -> RegisterLayout {
    RegisterLayout::single("M", 2).unwrap()
}

fn diag(p: &[f64]) -> DensityMatrix {
    DensityMatrix::diagonal(RegisterLayout::single("M", p.len()).unwrap(), p).unwrap()
}

fn ket0() -> DensityMatrix {
    DensityMatrix::basis(qubit(), 0).unwrap()
}

fn plus() -> DensityMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    DensityMatrix::pure(qubit(), &[re(h), re(h)]).unwrap()
}

/// Brute-force grid over 2-outcome distributions: min over p' in the ball of max p'_i/q_i.
fn grid_oracle(p: &[f64; 2], q: &[f64; 2], eps: f64) -> f64 {
    let target = (1.0 - eps * eps).sqrt();
    let mut best = f64::INFINITY;
    let n = 2_000_000;
    for k in 0..=n {
        let x = k as f64 / n as f64;
        let f = (p[0] * x).sqrt() + (p[1] * (1.0 - x)).sqrt();
        if f >= target {
            best = best.min((x / q[0]).max((1.0 - x) / q[1]));
        }
    }
    best.log2()
}

#[test]
fn relative_entropy_examples() {
    let mm = DensityMatrix::maximally_mixed(qubit());
    assert!(relative_entropy(&plus(), &plus()).unwrap().value.abs() < 1e-12);
    assert!((relative_entropy(&ket0(), &mm).unwrap().value - 1.0).abs() < 1e-12);
    // S(Δρ) − S(ρ) for |+⟩: 1 − 0
    assert!((relative_entropy(&plus(), &mm).unwrap().value - 1.0).abs() < 1e-10);
    assert!(relative_entropy(&mm, &ket0()).unwrap().is_infinite());
}

#[test]
fn variance_examples() {
    let mm = DensityMatrix::maximally_mixed(qubit());
    assert!(relative_entropy_variance(&ket0(), &mm).unwrap().value.abs() < 1e-12);
    let p = [0.7, 0.3];
    let d: f64 = p.iter().map(|x| x * (x / 0.5f64).log2()).sum();
    let second: f64 = p.iter().map(|x| x * (x / 0.5f64).log2().powi(2)).sum();
    let v = relative_entropy_variance(&diag(&p), &diag(&[0.5, 0.5])).unwrap().value;
    assert!((v - (second - d * d)).abs() < 1e-12);
    assert!(matches!(relative_entropy_variance(&mm, &ket0()), Err(erasure_core::Error::SupportViolation(_))));
}

#[test]
fn dmax_examples_and_additivity() {
    let mm = DensityMatrix::maximally_mixed(qubit());
    assert!((dmax(&ket0(), &mm).unwrap().value - 1.0).abs() < 1e-12);
    let v = dmax(&diag(&[0.9, 0.1]), &diag(&[0.5, 0.5])).unwrap().value;
    assert!((v - 1.8f64.log2()).abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let r = random_full_rank(&qubit(), &mut rng);
        let s = random_full_rank(&qubit(), &mut rng);
        let one = dmax(&r, &s).unwrap().value;
        let two = dmax(&r.tensor_power(2).unwrap(), &s.tensor_power(2).unwrap()).unwrap().value;
        assert!((two - 2.0 * one).abs() < 1e-8);
        assert!(relative_entropy(&r, &s).unwrap().value <= one + 1e-9);
    }
}

#[test]
fn smooth_dmax_matches_grid_oracle_on_classical_example() {
    let e = smooth_dmax(&diag(&[0.9, 0.1]), &diag(&[0.5, 0.5]), 0.1).unwrap();
    let grid = grid_oracle(&[0.9, 0.1], &[0.5, 0.5], 0.1);
    let oracle = smooth_dmax_classical_oracle(&[0.9, 0.1], &[0.5, 0.5], 0.1).unwrap().value;
    assert!((e.value - grid).abs() < 1e-3, "{} vs {grid}", e.value);
    assert!((oracle - grid).abs() < 1e-5, "{oracle} vs {grid}");
    let o3 = smooth_dmax_classical_oracle(&[0.9, 0.1], &[0.5, 0.5], 0.3).unwrap().value;
    assert!(o3 < 1.8f64.log2());
}

#[test]
fn smooth_dmax_trivial_cases() {
    let r = diag(&[0.3, 0.7]);
    let e = smooth_dmax(&r, &r, 0.2).unwrap();
    assert_eq!(e.value, 0.0);
    assert!(e.certificate.unwrap().approx_eq(&r, 1e-12));
    let s = diag(&[0.6, 0.4]);
    let e0 = smooth_dmax(&r, &s, 0.0).unwrap().value;
    assert_eq!(e0, dmax(&r, &s).unwrap().value);
}

#[test]
fn smooth_dmax_certificates_are_valid_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let l = RegisterLayout::single("M", 3).unwrap();
    for _ in 0..6 {
        let r = random_state(&l, 2, &mut rng).unwrap();
        let s = random_full_rank(&l, &mut rng);
        let mut last = f64::INFINITY;
        for eps in [0.0, 0.05, 0.1, 0.2] {
            let e = smooth_dmax(&r, &s, eps).unwrap();
            assert!(e.value <= last + 1e-4, "not monotone in eps");
            last = e.value;
            let c = e.certificate.as_ref().unwrap();
            assert!(purified_distance(&r, c).unwrap() <= eps + 1e-6);
            let bound = linalg::lincomb(s.matrix(), e.value.exp2(), c.matrix(), -1.0);
            assert!(linalg::eigvalsh(&bound).unwrap()[0] >= -1e-8);
            assert!(e.lower_bound.unwrap() <= e.value + 1e-12);
        }
    }
}

#[test]
fn smooth_dmax_agrees_with_oracle_on_commuting_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let l = RegisterLayout::single("M", 4).unwrap();
    for _ in 0..8 {
        let r = random_diagonal(&l, &mut rng);
        let s = random_diagonal(&l, &mut rng);
        for eps in [0.05, 0.2] {
            let e = smooth_dmax(&r, &s, eps).unwrap().value;
            let o = smooth_dmax_classical_oracle(&r.diagonal_probs(), &s.diagonal_probs(), eps).unwrap().value;
            assert!((e - o).abs() < 1e-3, "{e} vs {o}");
        }
    }
    // commuting but not diagonal: rotate both by the same unitary
    let u = erasure_core::qstate::random::random_unitary_matrix(4, &mut rng);
    let r = random_diagonal(&l, &mut rng);
    let s = random_diagonal(&l, &mut rng);
    let rot = |x: &DensityMatrix| {
        DensityMatrix::new(l.clone(), linalg::hermitian_part(&(&u * x.matrix() * u.adjoint()))).unwrap()
    };
    let e = smooth_dmax(&rot(&r), &rot(&s), 0.1).unwrap().value;
    let o = smooth_dmax_classical_oracle(&r.diagonal_probs(), &s.diagonal_probs(), 0.1).unwrap().value;
    assert!((e - o).abs() < 1e-3, "{e} vs {o}");
}

#[test]
fn gaussian_quantiles() {
    assert_eq!(gaussian_cdf_inv(0.5).unwrap(), 0.0);
    assert!((gaussian_cdf(0.0) - 0.5).abs() < 1e-15);
    for eps in [0.5, 0.25, 0.1, 0.01, 1e-4] {
        let x = gaussian_cdf_inv(eps).unwrap();
        assert!((gaussian_cdf(x) - eps).abs() < 1e-10);
        assert!(x.abs() <= fact8_bound(eps).unwrap());
    }
    assert!(gaussian_cdf_inv(0.0).is_err() && gaussian_cdf_inv(1.0).is_err());
}

#[test]
fn second_order_trivial_cases() {
    let r = diag(&[0.3, 0.7]);
    assert_eq!(second_order_dmax(&r, &r, 5, 0.5).unwrap().value, 0.0);
    let s = diag(&[0.5, 0.5]);
    let d = relative_entropy(&r, &s).unwrap().value;
    let v = second_order_dmax(&r, &s, 7, 0.5).unwrap();
    assert!((v.value - 7.0 * d).abs() < 1e-12);
    assert_eq!(v.method, Method::SecondOrderExpansion);
}

#[test]
fn continuity_bound_under_coherence() {
    use erasure_core::free_sets::FreeSet;
    let r = plus();
    assert_eq!(continuity_bound(&r, &r, &FreeSet::Coherence).unwrap(), 0.0);
    assert!((FreeSet::Coherence.inf_log_norm(&qubit()).unwrap() - 1.0).abs() < 1e-15);
    let far = ket0();
    assert!(continuity_bound(&plus(), &far, &FreeSet::Coherence).is_err());
}
