use lang_trotter::arith::{is_prime, legendre, quartic_symbol};
use lang_trotter::characters::{box_count_via_characters, direct_box_count};
use lang_trotter::classnum::{kronecker_h, FormCountTable};
use lang_trotter::curves::{hasse_bound, trace_of_frobenius, CurveParams};
use lang_trotter::experiments::{
    average_pi_r, box_residue_count, per_curve_counts, per_curve_counts_direct, ExperimentConfig,
};
use proptest::prelude::*;

fn odd_prime(max: u64) -> impl Strategy<Value = u64> {
    (5..max).prop_filter("prime", |&n| is_prime(n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn residue_counts_partition_the_box(p in odd_prime(200), a_box in 0u64..1000) {
        let sum: u64 = (0..p).map(|res| box_residue_count(res, p, a_box)).sum();
        prop_assert_eq!(sum, 2 * a_box + 1);
    }

    #[test]
    fn traces_respect_hasse(p in odd_prime(2000), a in -10_000i64..10_000, b in -10_000i64..10_000) {
        let curve = CurveParams::new(p, a, b).unwrap();
        prop_assume!(!curve.is_singular());
        prop_assert!(trace_of_frobenius(&curve).unwrap().abs() <= hasse_bound(p));
    }

    #[test]
    fn twists_negate_the_trace(p in odd_prime(500), a in 0i64..500, b in 0i64..500, n in 2i64..500) {
        let curve = CurveParams::new(p, a, b).unwrap();
        prop_assume!(!curve.is_singular() && n % p as i64 != 0);
        let twist = CurveParams::new(p, a * n * n % p as i64, b * n % p as i64 * n % p as i64 * n % p as i64).unwrap();
        let sign = legendre(n, p).unwrap() as i64;
        prop_assert_eq!(trace_of_frobenius(&twist).unwrap(), sign * trace_of_frobenius(&curve).unwrap());
    }

    #[test]
    fn quartic_symbol_is_multiplicative(p in odd_prime(1000).prop_filter("1 mod 4", |p| p % 4 == 1), a in 1i64..5000, b in 1i64..5000) {
        prop_assume!(a % p as i64 != 0 && b % p as i64 != 0);
        let product = quartic_symbol(a * b, p).unwrap();
        let (x, y) = (quartic_symbol(a, p).unwrap(), quartic_symbol(b, p).unwrap());
        prop_assert_eq!(product.to_complex(), x.to_complex() * y.to_complex());
    }

    #[test]
    fn hurwitz_routes_agree(n in 3i64..20_000) {
        let d = -n;
        if let Ok(record) = kronecker_h(d) {
            let table = FormCountTable::build(n as u64, false);
            prop_assert_eq!(table.kronecker(d), Some(record.h_total));
            prop_assert_eq!(record.decomposition.iter().map(|t| t.h).sum::<u64>(), record.h_total);
        }
    }

    #[test]
    fn character_box_counts_match(
        p in prop::sample::select(vec![13u64, 17, 29, 37]),
        r in -3i64..=3,
        a_box in 1u64..50,
        b_box in 1u64..50,
    ) {
        let dec = box_count_via_characters(p, r, a_box, b_box).unwrap();
        let direct = direct_box_count(p, r, a_box, b_box).unwrap() as f64;
        prop_assert!((dec.total - direct).abs() < 1e-6);
        prop_assert!((dec.main + dec.e1 + dec.e2 - dec.total).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn both_paths_agree(x in 5u64..=50, a_box in 1u64..=60, b_box in 1u64..=60, r in -4i64..=4) {
        let config = ExperimentConfig::new(x, a_box, b_box, r);
        let counts = per_curve_counts_direct(&config).unwrap();
        prop_assert_eq!(&per_curve_counts(&config).unwrap(), &counts);
        let total: u64 = counts.iter().map(|&k| k as u64).sum();
        prop_assert_eq!(average_pi_r(&config).unwrap().mean, total as f64 / config.weight());
    }
}
