use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stochbound::bounds::{evaluate, psi, theorem1_bound, x_star};
use stochbound::generators::random::{
    random_irreducible, random_prob_vector, random_replacement, random_subset,
};
use stochbound::io::{matrix_to_json, matrix_to_triplets, parse_matrix_json, parse_triplets};
use stochbound::stationary::{stationarity_residual, stationary_vector};
use stochbound::{apply_perturbation, tv_distance};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn psi_is_monotone_and_dominates_identity(a in 0.0f64..2.0, b in 0.0f64..2.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (p_lo, p_hi) = (psi(lo).unwrap(), psi(hi).unwrap());
        prop_assert!(p_lo <= p_hi + 1e-15);
        prop_assert!(p_hi <= 1.0);
        prop_assert!(p_lo >= lo.min(1.0) - 1e-15);
    }

    #[test]
    fn psi_is_continuous_at_the_kink(eps in 1e-12f64..1e-6) {
        let x = x_star();
        prop_assert!((psi(x - eps).unwrap() - 1.0).abs() < 1e-4);
        prop_assert_eq!(psi(x + eps).unwrap(), 1.0);
    }

    #[test]
    fn theorem_bound_shrinks_with_gamma(t in 1usize..50, g in 0.01f64..1.0, tau in 1.0f64..1e4) {
        let a = theorem1_bound(t, g, tau).unwrap();
        let b = theorem1_bound(t, (g * 2.0).min(1.0), tau).unwrap();
        prop_assert!(b <= a + 1e-15);
        prop_assert_eq!(theorem1_bound(t, 0.0, tau).unwrap(), 1.0);
    }

    #[test]
    fn tv_is_a_metric(seed in any::<u64>(), n in 1usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_prob_vector(&mut rng, n, 0.3);
        let b = random_prob_vector(&mut rng, n, 0.3);
        let c = random_prob_vector(&mut rng, n, 0.3);
        let ab = tv_distance(&a, &b).unwrap();
        prop_assert!((0.0..=1.0 + 1e-15).contains(&ab));
        prop_assert_eq!(ab, tv_distance(&b, &a).unwrap());
        prop_assert_eq!(tv_distance(&a, &a).unwrap(), 0.0);
        prop_assert!(ab <= tv_distance(&a, &c).unwrap() + tv_distance(&c, &b).unwrap() + 1e-15);
    }

    #[test]
    fn stationary_vector_is_invariant(seed in any::<u64>(), n in 2usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_irreducible(&mut rng, n, 0.2).unwrap();
        let pi = stationary_vector(&p).unwrap();
        prop_assert!(stationarity_residual(&p, pi.as_slice()) <= 1e-10);
        prop_assert!(pi.as_slice().iter().all(|&x| x > 0.0));
    }

    #[test]
    fn perturbation_only_touches_w(seed in any::<u64>(), n in 3usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_irreducible(&mut rng, n, 0.3).unwrap();
        let set = random_subset(&mut rng, n, n / 2);
        let spec = random_replacement(&mut rng, n, &set, 0.3).unwrap();
        let pt = apply_perturbation(&p, &spec).unwrap();
        for u in p.differing_rows(&pt, 0.0).unwrap() {
            prop_assert!(set.contains(&u));
        }
    }

    #[test]
    fn bounds_dominate_on_random_instances(seed in any::<u64>(), n in 3usize..25) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_irreducible(&mut rng, n, 0.3).unwrap();
        let set = random_subset(&mut rng, n, n / 2);
        let spec = random_replacement(&mut rng, n, &set, 0.5).unwrap();
        let pt = apply_perturbation(&p, &spec).unwrap();
        prop_assume!(pt.is_irreducible());
        let e = evaluate(&p, &pt, &set).unwrap();
        let tv = e.bounds.exact_tv.unwrap().value;
        prop_assert!(e.bounds.bound_thm1.value >= tv - 1e-12);
        prop_assert!(e.bounds.bound_lemma1.unwrap().value >= tv - 1e-12);
        prop_assert!(e.bounds.pi_tilde_w.unwrap().value <= e.bounds.pi_tilde_w_bound_lemma2.value + 1e-12);
        prop_assert!(e.chain.tau_star.value >= e.bounds.tau_star_lower_prop1.value - 1e-9);
        prop_assert!(e.chain.kac_residual.value <= 1e-8);
    }

    #[test]
    fn file_formats_roundtrip(seed in any::<u64>(), n in 1usize..15) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_irreducible(&mut rng, n, 0.4).unwrap();
        let (q, _) = parse_matrix_json(&matrix_to_json(&p, None)).unwrap();
        prop_assert_eq!(&p, &q);
        prop_assert_eq!(&p, &parse_triplets(&matrix_to_triplets(&p)).unwrap());
    }
}
