//! The exact simplex solver and the certification linear programs.

use isc_core::coupling::{increasing_coupling, spence_mirrlees_cost, CostTable};
use isc_core::gen::InstanceGenerator;
use isc_core::num::{int, Rational};
use isc_core::oracle::{lp_solve, max_over_couplings, min_over_eta, LpProblem, LpStatus, TransportConstraint};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A bounded feasible LP: `x` in a box, one equality and a few random inequalities.
fn random_problem(rng: &mut ChaCha8Rng) -> LpProblem {
    let n = rng.gen_range(2..=5);
    let mut p = LpProblem::new(n);
    p.objective = (0..n).map(|_| int(rng.gen_range(-6..=6))).collect();
    for i in 0..n {
        let mut row = vec![int(0); n];
        row[i] = int(1);
        p.add_le(row, int(rng.gen_range(1..=4)));
    }
    p.add_eq(vec![int(1); n], int(1));
    for _ in 0..rng.gen_range(0..=3) {
        let row: Vec<Rational> = (0..n).map(|_| int(rng.gen_range(-3..=3))).collect();
        let rhs = row.iter().cloned().fold(int(0), |a, b| a.max(b)) + int(rng.gen_range(0..=2));
        p.add_le(row, rhs);
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn optimum_is_invariant_under_permutations(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_problem(&mut rng);
        let base = lp_solve(&p);
        prop_assert_eq!(base.status, LpStatus::Optimal);
        prop_assert!(p.is_feasible(&base.primal));

        let mut rows: Vec<usize> = (0..p.le_rows.len()).collect();
        rows.shuffle(&mut rng);
        let mut q = p.clone();
        q.le_rows = rows.iter().map(|&i| p.le_rows[i].clone()).collect();
        q.le_rhs = rows.iter().map(|&i| p.le_rhs[i].clone()).collect();
        prop_assert_eq!(&lp_solve(&q).value, &base.value);

        let mut cols: Vec<usize> = (0..p.num_vars()).collect();
        cols.shuffle(&mut rng);
        let permute = |v: &Vec<Rational>| cols.iter().map(|&j| v[j].clone()).collect::<Vec<_>>();
        let mut r = p.clone();
        r.objective = permute(&p.objective);
        r.eq_rows = p.eq_rows.iter().map(permute).collect();
        r.le_rows = p.le_rows.iter().map(permute).collect();
        prop_assert_eq!(&lp_solve(&r).value, &base.value);
    }

    #[test]
    fn shadow_lp_trivial_objectives(seed in any::<u64>()) {
        let mut g = InstanceGenerator::new(seed);
        let (mu, nu) = g.pcd_instance();
        let ones = vec![int(1); nu.len()];
        prop_assert_eq!(min_over_eta(&mu, &nu, &ones).unwrap().value, mu.mass());
        // With equal masses the only feasible η is ν itself.
        let (mu, nu) = g.cd_instance();
        let f: Vec<Rational> = nu.locations().map(|y| y * y).collect();
        let expected: Rational = nu.atoms().iter().map(|(y, w)| y * y * w).sum();
        prop_assert_eq!(min_over_eta(&mu, &nu, &f).unwrap().value, expected);
    }

    #[test]
    fn increasing_coupling_maximises_the_generator_cost(seed in any::<u64>()) {
        let (mu, nu) = InstanceGenerator::new(seed).cd_instance();
        let cost = spence_mirrlees_cost(&mu, &nu);
        let own = increasing_coupling(&mu, &nu).unwrap().cost(&cost).unwrap();
        let lp = max_over_couplings(&mu, &nu, &cost, TransportConstraint::Supermartingale).unwrap();
        prop_assert_eq!(lp.value, own);
    }
}

#[test]
fn infeasible_and_unbounded_problems_are_classified() {
    let mut p = LpProblem::new(1);
    p.add_le(vec![int(1)], int(-1));
    assert_eq!(lp_solve(&p).status, LpStatus::Infeasible);
    let mut p = LpProblem::new(1);
    p.objective = vec![int(-1)];
    assert_eq!(lp_solve(&p).status, LpStatus::Unbounded);
}

#[test]
fn missing_cost_entries_are_errors() {
    let (mu, nu) = InstanceGenerator::new(1).cd_instance();
    let pi = increasing_coupling(&mu, &nu).unwrap();
    assert!(pi.cost(&CostTable::new()).is_err());
}
