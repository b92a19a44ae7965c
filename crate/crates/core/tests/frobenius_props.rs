mod common;

use common::*;
use frobthresh::frobenius::{
    eth_root_q, frobenius_decompose, pair_step, pair_trace_image, trace_of_product, PairDivisor, PowerSum,
    TraceFactor,
};
use frobthresh::Ideal;
use proptest::prelude::*;

fn small_ideal(seed: u64, p: u32, gens: usize, max_deg: u32) -> Ideal {
    let r = ring(p, &["x", "y"]);
    random_local_ideal(&r, &mut rng(seed), gens, max_deg, 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decomposition_reassembles(seed in any::<u64>(), p in prop::sample::select(vec![2u32, 3, 5]), e in 1u32..=2) {
        let r = ring(p, &["x", "y", "z"]);
        let g = random_poly(&r, &mut rng(seed), 9, 8);
        let comps = frobenius_decompose(&g, e, &r).unwrap();
        prop_assert_eq!(comps.reassemble(&r), g);
    }

    #[test]
    fn root_is_additive(s1 in any::<u64>(), s2 in any::<u64>(), p in prop::sample::select(vec![2u32, 3])) {
        let a = small_ideal(s1, p, 2, 7);
        let b = small_ideal(s2, p, 1, 7);
        let lhs = eth_root_q(&a.sum(&b).unwrap(), p);
        let rhs = eth_root_q(&a, p).sum(&eth_root_q(&b, p)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn projection_formula(s1 in any::<u64>(), s2 in any::<u64>(), p in prop::sample::select(vec![2u32, 3])) {
        let r = ring(p, &["x", "y"]);
        let j = small_ideal(s1, p, 2, 6);
        let h = random_poly(&r, &mut rng(s2), 2, 3);
        let lhs = eth_root_q(&j.mul_poly(&h.frobenius_power(p)), p);
        let rhs = eth_root_q(&j, p).mul_poly(&h).canonical();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn root_is_least_with_bracket_containment(seed in any::<u64>(), p in prop::sample::select(vec![2u32, 3])) {
        let j = small_ideal(seed, p, 2, 8);
        let c = eth_root_q(&j, p);
        prop_assert!(j.is_subset_of(&c.frobenius_bracket(p)));
        prop_assert_eq!(&c, &brute_eth_root(&j, p));
    }

    #[test]
    fn trace_of_product_matches_direct(
        seed in any::<u64>(),
        p in prop::sample::select(vec![2u32, 3]),
        n in 1u64..=9,
        steps in 1u32..=2,
        twisted in any::<bool>(),
    ) {
        let r = ring(p, &["x", "y"]);
        let a = small_ideal(seed, p, 2, 2);
        let d = if twisted {
            PairDivisor::new(&r, r.parse("x*y").unwrap(), 1, 1).unwrap()
        } else {
            PairDivisor::trivial(&r, 1).unwrap()
        };
        let b = PowerSum::plain(a.clone());
        let z = Ideal::unit(&r);
        let fast = trace_of_product(&d, steps, &[TraceFactor { base: &b, exponent: n }], &z, None).unwrap();
        let direct = pair_trace_image(&a.power(n), &d, steps).unwrap();
        prop_assert_eq!(fast, direct);
    }

    #[test]
    fn trace_of_power_sum_matches_direct(seed in any::<u64>(), n in 1u64..=8, big in 1u64..=3) {
        let r = ring(2, &["x", "y"]);
        let a = small_ideal(seed, 2, 1, 3);
        let d = PairDivisor::trivial(&r, 1).unwrap();
        let b = PowerSum::perturbed(a.clone(), big);
        let z = Ideal::maximal(&r);
        let fast = trace_of_product(&d, 2, &[TraceFactor { base: &b, exponent: n }], &z, None).unwrap();
        let sum = a.sum(&Ideal::max_power(&r, big)).unwrap();
        let direct = pair_trace_image(&sum.power(n).product(&z).unwrap(), &d, 2).unwrap();
        prop_assert_eq!(fast, direct);
    }

    #[test]
    fn truncated_trace_agrees_modulo(seed in any::<u64>(), n in 1u64..=12, modulus in 1u64..=4) {
        let r = ring(3, &["x", "y"]);
        let a = small_ideal(seed, 3, 2, 3);
        let d = PairDivisor::trivial(&r, 1).unwrap();
        let b = PowerSum::plain(a);
        let z = Ideal::unit(&r);
        let f = [TraceFactor { base: &b, exponent: n }];
        let exact = trace_of_product(&d, 2, &f, &z, None).unwrap();
        let cut = trace_of_product(&d, 2, &f, &z, Some(modulus)).unwrap();
        let mm = Ideal::max_power(&r, modulus);
        prop_assert_eq!(exact.sum(&mm).unwrap(), cut.sum(&mm).unwrap());
    }
}

#[test]
fn pair_step_twists_by_divisor() {
    // Φ(x^{a} J) with Δ = (a/(p-1)) div(x)
    let r = ring(3, &["x", "y"]);
    let d = PairDivisor::new(&r, r.parse("x").unwrap(), 1, 1).unwrap();
    let j = ideal(&r, "x, y");
    assert_eq!(pair_step(&j, &d), brute_eth_root(&ideal(&r, "x^2, x*y"), 3));
}
