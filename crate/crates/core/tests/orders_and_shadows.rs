//! Stochastic orders, the maximal element and the shadow, checked against
//! the LP and brute-force oracles on seeded random instances.

use isc_core::gen::InstanceGenerator;
use isc_core::measure::DiscreteMeasure;
use isc_core::num::{int, rat, Rational};
use isc_core::oracle::{brute_force_pcd, min_over_eta};
use isc_core::order::{compare, maximal_element, OrderKind};
use isc_core::pwl::{call_potential, PwlFunction};
use isc_core::shadow::shadow;
use isc_core::Ext;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn m(atoms: &[(i64, i64, i64)]) -> DiscreteMeasure {
    DiscreteMeasure::new(atoms.iter().map(|&(x, p, q)| (int(x), rat(p, q)))).unwrap()
}

fn holds(a: &DiscreteMeasure, b: &DiscreteMeasure, kind: OrderKind) -> bool {
    compare(a, b, kind).is_ok()
}

/// A measure with at most four integer atoms in `[-3, 3]` and weights in quarters.
fn lattice_measure(rng: &mut ChaCha8Rng, max_quarters: i64) -> DiscreteMeasure {
    let n = rng.gen_range(1..=4);
    DiscreteMeasure::new((0..n).map(|_| (int(rng.gen_range(-3..=3)), rat(rng.gen_range(0..=max_quarters), 4))))
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn implication_chain(seed in any::<u64>()) {
        let mut g = InstanceGenerator::new(seed);
        let pairs = [g.convex_instance(), g.cd_instance(), g.pcd_instance(), g.separated_instance()];
        for (a, b) in &pairs {
            if holds(a, b, OrderKind::Convex) {
                prop_assert!(holds(a, b, OrderKind::ConvexDecreasing));
            }
            if holds(a, b, OrderKind::ConvexDecreasing) {
                prop_assert!(holds(a, b, OrderKind::PositiveConvexDecreasing));
                prop_assert_eq!(a.mass(), b.mass());
                prop_assert!(a.mean() >= b.mean());
            }
            if holds(a, b, OrderKind::PositiveConvex) {
                prop_assert!(holds(a, b, OrderKind::PositiveConvexDecreasing));
            }
        }
        let nu = g.target();
        let xi = g.sub_measure(&nu);
        prop_assert!(holds(&xi, &nu, OrderKind::Pointwise));
        prop_assert!(holds(&xi, &nu, OrderKind::PositiveConvex));
        prop_assert!(holds(&xi, &nu, OrderKind::PositiveConvexDecreasing));
    }

    #[test]
    fn maximal_element_properties(seed in any::<u64>()) {
        let mut g = InstanceGenerator::new(seed);
        let (mu, nu) = g.pcd_instance();
        let t = maximal_element(&mu, &nu).unwrap();
        prop_assert!(holds(&mu, &t, OrderKind::ConvexDecreasing));
        prop_assert!(t.dominated_by(&nu));
        // Vertices of {η : μ ≤_cd η ≤ ν} sampled through random LP objectives.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..4 {
            let f: Vec<Rational> = nu.locations().map(|_| int(rng.gen_range(-5..=5))).collect();
            let lp = min_over_eta(&mu, &nu, &f).unwrap();
            let eta = DiscreteMeasure::new(nu.locations().cloned().zip(lp.primal.iter().cloned())).unwrap();
            prop_assert!(holds(&mu, &eta, OrderKind::ConvexDecreasing));
            prop_assert!(holds(&eta, &t, OrderKind::ConvexDecreasing));
        }
    }

    #[test]
    fn shadow_excess_matches_call_potential_gap(seed in any::<u64>()) {
        let (mu, nu) = InstanceGenerator::new(seed).pcd_instance();
        let r = shadow(&mu, &nu).unwrap();
        let sup = match PwlFunction::sup_difference(&call_potential(&mu), &call_potential(&nu)) {
            Ext::Finite(s) => s.max(int(0)),
            other => panic!("unbounded excess {other}"),
        };
        prop_assert_eq!(r.excess, sup);
        prop_assert_eq!(r.shadow.mass(), mu.mass());
    }
}

#[test]
fn pcd_agrees_with_brute_force_on_lattice_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut positives = 0;
    for _ in 0..300 {
        let nu = lattice_measure(&mut rng, 4);
        let mu = lattice_measure(&mut rng, 2);
        if mu.is_zero() || nu.is_zero() {
            continue;
        }
        let expected = brute_force_pcd(&mu, &nu, 4).unwrap();
        assert_eq!(holds(&mu, &nu, OrderKind::PositiveConvexDecreasing), expected, "{mu} vs {nu}");
        positives += usize::from(expected);
    }
    assert!(positives > 20, "too few positive instances ({positives})");
}

#[test]
fn nested_shadow_differs_from_direct_shadow() {
    let nu = m(&[(-2, 1, 3), (0, 1, 3), (2, 1, 3)]);
    let mu = m(&[(-2, 1, 3), (2, 1, 3)]);
    let xi = m(&[(0, 1, 3)]);
    assert!(holds(&xi, &mu, OrderKind::PositiveConvexDecreasing));
    let via = shadow(&xi, &shadow(&mu, &nu).unwrap().shadow).unwrap().shadow;
    assert_ne!(via, shadow(&xi, &nu).unwrap().shadow);
}

#[test]
fn order_witnesses_are_reported() {
    let err = compare(&m(&[(0, 1, 2)]), &m(&[(1, 1, 2)]), OrderKind::ConvexDecreasing).unwrap_err();
    assert!(!err.to_string().is_empty());
    assert!(compare(&m(&[(0, 1, 1)]), &m(&[(0, 1, 2)]), OrderKind::Convex).is_err());
}
