//! Properties of measures, quantile lifts and piecewise-linear potentials.

use isc_core::gen::InstanceGenerator;
use isc_core::measure::{DiscreteMeasure, QuantileSide};
use isc_core::num::{rat, Rational};
use isc_core::pwl::{call_potential, put_potential, PwlFunction};
use num_traits::Signed;
use proptest::prelude::*;

fn levels(m: &DiscreteMeasure, n: i64) -> Vec<Rational> {
    (0..=n).map(|k| rat(k, n) * m.mass()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lifts_are_nested_with_exact_mass(seed in any::<u64>()) {
        let (mu, _) = InstanceGenerator::new(seed).cd_instance();
        let grid = levels(&mu, 24);
        for (i, u) in grid.iter().enumerate() {
            let lu = mu.lift(u).unwrap();
            prop_assert_eq!(lu.mass(), u.clone());
            for v in &grid[i..] {
                let lv = mu.lift(v).unwrap();
                prop_assert!(lu.dominated_by(&lv));
                let gap = lv.sub(&lu).unwrap();
                if !gap.is_zero() && u.is_positive() {
                    let lo = mu.quantile(u, QuantileSide::Left).unwrap();
                    let hi = mu.quantile(v, QuantileSide::Left).unwrap();
                    prop_assert!(*gap.min_atom().unwrap() >= lo && *gap.max_atom().unwrap() <= hi);
                }
            }
        }
    }

    #[test]
    fn quantile_is_a_generalized_inverse(seed in any::<u64>()) {
        let nu = InstanceGenerator::new(seed).target();
        for u in levels(&nu, 36).into_iter().skip(1) {
            let g = nu.quantile(&u, QuantileSide::Left).unwrap();
            prop_assert!(nu.mass_below(&g) < u && u <= nu.cdf(&g));
        }
    }

    #[test]
    fn addition_laws(seed in any::<u64>()) {
        let mut g = InstanceGenerator::new(seed);
        let (a, b, c) = (g.target(), g.target(), g.target());
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        prop_assert_eq!(a.add(&b).sub(&b).unwrap(), a);
    }

    #[test]
    fn potentials_round_trip_and_differ_by_an_affine_function(seed in any::<u64>()) {
        let m = InstanceGenerator::new(seed).target();
        prop_assert_eq!(put_potential(&m).measure_of().unwrap(), m.clone());
        let diff = call_potential(&m).sub(&put_potential(&m));
        prop_assert_eq!(diff, PwlFunction::affine(-m.mass(), m.mean()));
    }

    #[test]
    fn hull_is_the_largest_convex_minorant_at_breakpoints(seed in any::<u64>()) {
        let f = InstanceGenerator::new(seed).pwl();
        let h = f.convex_hull().unwrap();
        prop_assert!(h.is_convex());
        for k in f.breakpoints() {
            prop_assert!(h.eval(k) <= f.eval(k));
        }
        // Every hull vertex touches f (an affine hull is stored with a nominal anchor).
        for k in h.breakpoints().filter(|_| !h.is_affine()) {
            prop_assert_eq!(h.eval(k), f.eval(k));
        }
        prop_assert_eq!((h.left_slope(), h.right_slope()), (f.left_slope(), f.right_slope()));
    }
}

#[test]
fn decimal_and_fraction_inputs_agree() {
    use isc_core::num::parse_rational;
    assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
    assert_eq!(parse_rational("-3/12").unwrap(), rat(-1, 4));
    assert_eq!(parse_rational("2.5e-1").unwrap(), rat(1, 4));
    assert!(parse_rational("1/0").is_err());
}
