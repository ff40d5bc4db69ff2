use mwi_core::counterexamples::{closed_forms, family_1d, FamilyParams};
use mwi_core::inequality::ratio;
use mwi_core::lemma::{kappa_objective, kappa_tilde_objective};
use mwi_core::martingale::{
    check_convex_order, convex_order_1d, coupling_cost, mot_bounds, second_moment_gap, MartingaleProblem,
};
use mwi_core::sampling::{random_1d_order_candidate, random_convex_pair, random_measure};
use mwi_core::transport::{comonotone_1d, wasserstein, wasserstein_with, TransportOptions};
use mwi_core::{central_moment, DiscreteMeasure, ExtendedIndex, Norm};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const INF: ExtendedIndex = ExtendedIndex::Infinite;

fn fin(v: f64) -> ExtendedIndex {
    ExtendedIndex::Finite(v)
}

fn measure(dim: usize, max_atoms: usize) -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((prop::collection::vec(-5.0..5.0f64, dim), 0.05..1.0f64), 1..=max_atoms).prop_map(
        |atoms| {
            let (points, weights) = atoms.into_iter().unzip();
            DiscreteMeasure::new(points, weights).unwrap()
        },
    )
}

fn convex_pair(dim: usize) -> impl Strategy<Value = (DiscreteMeasure, DiscreteMeasure)> {
    any::<u64>().prop_map(move |seed| random_convex_pair(&mut ChaCha8Rng::seed_from_u64(seed), dim, 8).unwrap())
}

fn norm() -> impl Strategy<Value = Norm> {
    prop_oneof![Just(Norm::Euclidean), Just(Norm::Sup), (1.0..4.0f64).prop_map(Norm::P)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn measures_are_normalised_sorted_and_merged(m in measure(2, 10)) {
        let total: f64 = m.weights().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let pts: Vec<&[f64]> = m.points().collect();
        for w in pts.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
        prop_assert!(m.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn wasserstein_is_monotone_in_order(mu in measure(2, 6), nu in measure(2, 6), n in norm()) {
        let mut last = 0.0;
        for q in [fin(1.0), fin(1.5), fin(2.0), fin(3.0), INF] {
            let (w, _) = wasserstein(&mu, &nu, q, n).unwrap();
            prop_assert!(w >= last - 1e-8, "q={q}: {w} < {last}");
            last = w;
        }
    }

    #[test]
    fn wasserstein_is_symmetric_and_vanishes_on_the_diagonal(mu in measure(2, 6), nu in measure(2, 6)) {
        for q in [fin(1.0), fin(2.0), INF] {
            let (a, _) = wasserstein(&mu, &nu, q, Norm::Euclidean).unwrap();
            let (b, _) = wasserstein(&nu, &mu, q, Norm::Euclidean).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
            prop_assert!(wasserstein(&mu, &mu, q, Norm::Euclidean).unwrap().0.abs() < 1e-12);
        }
    }

    #[test]
    fn triangle_inequality(a in measure(2, 5), b in measure(2, 5), c in measure(2, 5)) {
        for q in [fin(1.0), fin(2.0), INF] {
            let ab = wasserstein(&a, &b, q, Norm::Euclidean).unwrap().0;
            let bc = wasserstein(&b, &c, q, Norm::Euclidean).unwrap().0;
            let ac = wasserstein(&a, &c, q, Norm::Euclidean).unwrap().0;
            prop_assert!(ac <= ab + bc + 1e-8);
        }
    }

    #[test]
    fn couplings_have_the_requested_marginals(mu in measure(3, 6), nu in measure(3, 6), q in 1.0..3.0f64) {
        let (_, c) = wasserstein(&mu, &nu, fin(q), Norm::Euclidean).unwrap();
        prop_assert!(c.marginal_error(&mu, &nu) <= 1e-9);
        prop_assert!(c.min_weight() >= 0.0);
    }

    #[test]
    fn line_lp_agrees_with_comonotone(mu in measure(1, 20), nu in measure(1, 20)) {
        let lp = TransportOptions { force_lp: true, ..Default::default() };
        let c = comonotone_1d(&mu, &nu).unwrap();
        for q in [1.0, 1.5, 2.0, 3.0] {
            let (w, _) = wasserstein_with(&mu, &nu, fin(q), Norm::Euclidean, &lp).unwrap();
            prop_assert!((w - c.cost(fin(q), Norm::Euclidean).powf(1.0 / q)).abs() < 1e-8);
        }
        let (w, _) = wasserstein_with(&mu, &nu, INF, Norm::Euclidean, &lp).unwrap();
        prop_assert!((w - c.cost(INF, Norm::Euclidean)).abs() < 1e-12);
    }

    #[test]
    fn central_moment_is_monotone_in_p(m in measure(2, 7), n in norm()) {
        let mut last = 0.0;
        for p in [fin(1.0), fin(1.5), fin(2.0), fin(4.0), INF] {
            let s = central_moment(&m, p, n);
            prop_assert!(s >= last - 1e-6 * (1.0 + last), "p={p}: {s} < {last}");
            last = s;
        }
    }

    #[test]
    fn convex_order_checks_agree(seed in any::<u64>()) {
        let (mu, nu) = random_1d_order_candidate(&mut ChaCha8Rng::seed_from_u64(seed), 8).unwrap();
        prop_assert_eq!(convex_order_1d(&mu, &nu).unwrap(), check_convex_order(&mu, &nu).unwrap());
    }

    #[test]
    fn quadratic_cost_is_the_second_moment_gap((mu, nu) in convex_pair(3)) {
        let b = mot_bounds(&MartingaleProblem::new(mu.clone(), nu.clone(), 2.0, Norm::Euclidean).unwrap()).unwrap();
        let gap = second_moment_gap(&mu, &nu);
        prop_assert!((b.upper_cost - b.lower_cost).abs() <= 1e-8);
        prop_assert!((b.lower_cost - gap).abs() <= 1e-7);
    }

    #[test]
    fn bounds_are_ordered_and_dominate_transport((mu, nu) in convex_pair(2), rho in 1.0..3.5f64, n in norm()) {
        let b = mot_bounds(&MartingaleProblem::new(mu.clone(), nu.clone(), rho, n).unwrap()).unwrap();
        prop_assert!(0.0 <= b.lower_cost && b.lower_cost <= b.upper_cost + 1e-12);
        let (w, _) = wasserstein(&mu, &nu, fin(rho), n).unwrap();
        prop_assert!(w.powf(rho) <= b.lower_cost + 1e-8);
        prop_assert!(b.argmin.marginal_error(&mu, &nu) <= 1e-9);
        prop_assert!(b.argmax.marginal_error(&mu, &nu) <= 1e-9);
    }

    #[test]
    fn bounds_are_translation_invariant((mu, nu) in convex_pair(2), shift in prop::collection::vec(-10.0..10.0f64, 2)) {
        let p = MartingaleProblem::new(mu.clone(), nu.clone(), 1.5, Norm::Euclidean).unwrap();
        let moved = MartingaleProblem::new(mu.translate(&shift).unwrap(), nu.translate(&shift).unwrap(), 1.5, Norm::Euclidean).unwrap();
        let (a, b) = (mot_bounds(&p).unwrap(), mot_bounds(&moved).unwrap());
        prop_assert!((a.lower_cost - b.lower_cost).abs() < 1e-8);
        prop_assert!((a.upper_cost - b.upper_cost).abs() < 1e-8);
    }

    #[test]
    fn ratios_are_scale_invariant((mu, nu) in convex_pair(2), s in 0.1..10.0f64, rho in 1.0..3.0f64) {
        for q in [fin(1.0), fin(2.0), INF] {
            let a = ratio(&mu, &nu, rho, q, Norm::Euclidean).unwrap();
            let b = ratio(&mu.scale(s).unwrap(), &nu.scale(s).unwrap(), rho, q, Norm::Euclidean).unwrap();
            prop_assert!(a.ratio_lower <= a.ratio_upper + 1e-12);
            prop_assert!((a.ratio_upper - b.ratio_upper).abs() <= 1e-6 * a.ratio_upper.max(1.0), "{a:?} {b:?}");
            prop_assert!((a.ratio_lower - b.ratio_lower).abs() <= 1e-6 * a.ratio_lower.max(1.0));
        }
    }

    #[test]
    fn family_coupling_lies_between_the_bounds(n in 2usize..8, z in 0.1..4.0f64, rho in 1.0..3.0f64) {
        let f = family_1d(n, z).unwrap();
        let b = mot_bounds(&MartingaleProblem::new(f.mu, f.nu, rho, Norm::Euclidean).unwrap()).unwrap();
        let cost = coupling_cost(&f.coupling, rho, Norm::Euclidean);
        let cf = closed_forms(&FamilyParams::new(n, z, rho, fin(1.0)).unwrap());
        prop_assert!((cost - cf.coupling_cost).abs() < 1e-12);
        prop_assert!(b.lower_cost <= cost + 1e-9 && cost <= b.upper_cost + 1e-9);
    }

    #[test]
    fn lemma_objectives_are_even_in_omega(z in -5.0..5.0f64, w in 0.01..5.0f64, rho in 2.0..5.0f64) {
        prop_assert_eq!(kappa_objective(z, w, rho), kappa_objective(z, -w, rho));
        prop_assert_eq!(kappa_tilde_objective(z, w, rho), kappa_tilde_objective(z, -w, rho));
    }
}

#[test]
fn random_measures_have_requested_dimension() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let m = random_measure(&mut rng, 4, 5, 1.0).unwrap();
    assert_eq!(m.dim(), 4);
}
