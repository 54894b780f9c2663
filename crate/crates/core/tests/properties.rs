use erasure_core::entropies::{dmax, smooth_dmax};
use erasure_core::free_sets::FreeSet;
use erasure_core::linalg;
use erasure_core::qstate::random::{random_diagonal, random_full_rank, random_state};
use erasure_core::qstate::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn layout(da: usize, db: usize) -> RegisterLayout {
    RegisterLayout::new([("A", da), ("B", db)]).unwrap()
}

fn state(l: &RegisterLayout, rank: usize, seed: u64) -> DensityMatrix {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    random_state(l, rank.min(l.dim()), &mut r).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn purified_distance_triangle(seed in any::<u64>(), d in 2usize..=3, ranks in (1usize..=3, 1usize..=3, 1usize..=3)) {
        let l = RegisterLayout::single("M", d).unwrap();
        let (a, b, c) = (state(&l, ranks.0, seed), state(&l, ranks.1, seed ^ 1), state(&l, ranks.2, seed ^ 2));
        let ab = purified_distance(&a, &b).unwrap();
        let ac = purified_distance(&a, &c).unwrap();
        let cb = purified_distance(&c, &b).unwrap();
        prop_assert!(ab <= ac + cb + 1e-9, "{ab} > {ac} + {cb}");
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        prop_assert!((ab - purified_distance(&b, &a).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn fidelity_grows_under_partial_trace(seed in any::<u64>(), da in 2usize..=3, db in 2usize..=3, rank in 1usize..=4) {
        let l = layout(da, db);
        let (x, y) = (state(&l, rank, seed), state(&l, rank, seed.wrapping_add(7)));
        let joint = fidelity(&x, &y).unwrap();
        let marg = fidelity(&x.partial_trace(&["B"]).unwrap(), &y.partial_trace(&["B"]).unwrap()).unwrap();
        prop_assert!(joint <= marg + 1e-9, "{joint} > {marg}");
    }

    #[test]
    fn purification_traces_back(seed in any::<u64>(), d in 2usize..=4, rank in 1usize..=4) {
        let l = RegisterLayout::single("M", d).unwrap();
        let rho = state(&l, rank, seed);
        for size in [AncillaSize::Full, AncillaSize::Rank] {
            let p = purify_with(&rho, "R", size).unwrap();
            prop_assert_eq!(p.rank().unwrap(), 1);
            let back = p.partial_trace(&["R"]).unwrap();
            prop_assert!(linalg::max_abs_diff(back.matrix(), rho.matrix()) < 1e-10);
        }
    }

    #[test]
    fn marginal_dominance_with_factor_dim_b(seed in any::<u64>(), da in 2usize..=3, db in 2usize..=3, rank in 1usize..=9) {
        let theta = state(&layout(da, db), rank, seed);
        let bound = marginal_support_bound(&theta, &["B"]).unwrap();
        prop_assert!(dominance_margin(&theta, &bound, db as f64).unwrap() >= -1e-9);
    }

    #[test]
    fn controlled_swap_is_an_involution_preserving_diagonal_states(seed in any::<u64>(), n in 1usize..=3) {
        let mut regs = vec![("M".to_string(), 2)];
        regs.extend((1..=n).map(|i| (format!("M{i}"), 2)));
        regs.push(("J".to_string(), n));
        let l = RegisterLayout::new(regs).unwrap();
        let blocks: Vec<String> = (1..=n).map(|i| format!("M{i}")).collect();
        let refs: Vec<&str> = blocks.iter().map(String::as_str).collect();
        let op = controlled_swap_single(&l, "J", "M", &refs).unwrap();
        prop_assert!(op.unitarity_error() < 1e-12);
        let twice = op.compose(&op).unwrap();
        prop_assert!(linalg::max_abs_diff(&twice.matrix(), &linalg::identity(l.dim())) < 1e-12);
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let diag = random_diagonal(&l, &mut r);
        prop_assert!(FreeSet::Coherence.membership(&op.apply(&diag).unwrap()).unwrap());
    }

    #[test]
    fn text_round_trip(seed in any::<u64>(), da in 1usize..=3, db in 1usize..=3) {
        let rho = state(&layout(da, db), 9, seed);
        let back = DensityMatrix::from_text(&rho.to_text()).unwrap();
        prop_assert_eq!(back.to_text(), rho.to_text());
    }

    #[test]
    fn smoothing_never_raises_dmax(seed in any::<u64>(), eps in 0.0f64..0.5) {
        let l = RegisterLayout::single("M", 2).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (rho, sigma) = (random_full_rank(&l, &mut r), random_full_rank(&l, &mut r));
        let plain = dmax(&rho, &sigma).unwrap().value;
        let smooth = smooth_dmax(&rho, &sigma, eps).unwrap();
        prop_assert!(smooth.value <= plain + 1e-7);
        if let Some(lo) = smooth.lower_bound {
            prop_assert!(lo <= smooth.value + 1e-7);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn free_set_axioms_hold(seed in any::<u64>()) {
        let l = layout(2, 2);
        let families = [
            FreeSet::Coherence,
            FreeSet::Uniformity,
            FreeSet::Gibbs { beta: 0.7, hamiltonians: vec![("A".into(), linalg::diag_real(&[0.0, 1.0]))], base2: false },
            FreeSet::Asymmetry { group: vec![linalg::identity(2), linalg::diag_real(&[1.0, -1.0])], labels: vec![] },
            FreeSet::separable(&["A"]),
            FreeSet::SharedRandomness { parties: 2 },
        ];
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        for f in families {
            let report = f.axiom_check(&l, 4, &mut r).unwrap();
            prop_assert!(report.passed(), "{:?}", report);
        }
    }
}
