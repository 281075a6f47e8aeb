//! Independent certification: an exact dense simplex solver and the linear
//! programs that certify shadow minimality and coupling optimality, plus a
//! brute-force decision procedure for `≤_pcd` on tiny lattice instances.
//!
//! Nothing here reuses the potential/hull machinery of the constructive
//! modules, so agreement between the two is meaningful evidence.

use num_traits::{One, Signed, Zero};

use crate::coupling::CostTable;
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::num::{pos_part, Rational};
use crate::order::{compare, require, OrderKind};

/// `min objective·x` subject to `eq_rows·x = eq_rhs`, `le_rows·x <= le_rhs`, `x >= 0`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LpProblem {
    pub objective: Vec<Rational>,
    pub eq_rows: Vec<Vec<Rational>>,
    pub eq_rhs: Vec<Rational>,
    pub le_rows: Vec<Vec<Rational>>,
    pub le_rhs: Vec<Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal objective value; zero unless `status` is `Optimal`.
    pub value: Rational,
    /// Optimal point; empty unless `status` is `Optimal`.
    pub primal: Vec<Rational>,
}

impl LpProblem {
    pub fn new(num_vars: usize) -> Self {
        Self { objective: vec![Rational::zero(); num_vars], ..Self::default() }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_eq(&mut self, row: Vec<Rational>, rhs: Rational) {
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
    }

    pub fn add_le(&mut self, row: Vec<Rational>, rhs: Rational) {
        self.le_rows.push(row);
        self.le_rhs.push(rhs);
    }

    pub fn add_ge(&mut self, row: Vec<Rational>, rhs: Rational) {
        self.add_le(row.into_iter().map(|a| -a).collect(), -rhs);
    }

    /// True if `x` satisfies every constraint exactly.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        let dot = |row: &[Rational]| -> Rational { row.iter().zip(x).map(|(a, b)| a * b).sum() };
        x.len() == self.num_vars()
            && x.iter().all(|v| !v.is_negative())
            && self.eq_rows.iter().zip(&self.eq_rhs).all(|(r, b)| dot(r) == *b)
            && self.le_rows.iter().zip(&self.le_rhs).all(|(r, b)| dot(r) <= *b)
    }
}

/// Solves `p` exactly with the two-phase tableau simplex method and Bland's
/// anti-cycling rule.
pub fn lp_solve(p: &LpProblem) -> LpSolution {
    let n = p.num_vars();
    let n_le = p.le_rows.len();
    let n_cols = n + n_le; // structural variables followed by slacks

    // Equality form with nonnegative right-hand sides.
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut rhs: Vec<Rational> = Vec::new();
    for (r, b) in p.eq_rows.iter().zip(&p.eq_rhs) {
        let mut row = r.clone();
        row.resize(n_cols, Rational::zero());
        rows.push(row);
        rhs.push(b.clone());
    }
    for (i, (r, b)) in p.le_rows.iter().zip(&p.le_rhs).enumerate() {
        let mut row = r.clone();
        row.resize(n_cols, Rational::zero());
        row[n + i] = Rational::one();
        rows.push(row);
        rhs.push(b.clone());
    }
    for (row, b) in rows.iter_mut().zip(rhs.iter_mut()) {
        if b.is_negative() {
            row.iter_mut().for_each(|a| *a = -a.clone());
            *b = -b.clone();
        }
    }

    // Phase 1: one artificial per row.
    let m = rows.len();
    let width = n_cols + m;
    let mut t = Tableau {
        a: rows
            .into_iter()
            .enumerate()
            .map(|(i, mut row)| {
                row.resize(width, Rational::zero());
                row[n_cols + i] = Rational::one();
                row
            })
            .collect(),
        b: rhs,
        basis: (n_cols..n_cols + m).collect(),
    };
    let mut phase1 = vec![Rational::zero(); width];
    phase1[n_cols..].iter_mut().for_each(|c| *c = Rational::one());
    let allowed = |_: usize| true;
    t.optimize(&phase1, &allowed);
    if !t.objective_value(&phase1).is_zero() {
        return LpSolution { status: LpStatus::Infeasible, value: Rational::zero(), primal: Vec::new() };
    }

    // Drive artificials out of the basis; rows where that is impossible are redundant.
    let mut r = 0;
    while r < t.a.len() {
        if t.basis[r] >= n_cols {
            match (0..n_cols).find(|&j| !t.a[r][j].is_zero()) {
                Some(j) => t.pivot(r, j),
                None => {
                    t.a.remove(r);
                    t.b.remove(r);
                    t.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    // Phase 2 over structural and slack columns only.
    let mut cost = vec![Rational::zero(); width];
    cost[..n].clone_from_slice(&p.objective);
    let structural = |j: usize| j < n_cols;
    if !t.optimize(&cost, &structural) {
        return LpSolution { status: LpStatus::Unbounded, value: Rational::zero(), primal: Vec::new() };
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &j) in t.basis.iter().enumerate() {
        if j < n {
            x[j] = t.b[i].clone();
        }
    }
    let value = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    debug_assert!(p.is_feasible(&x), "simplex returned an infeasible point");
    LpSolution { status: LpStatus::Optimal, value, primal: x }
}

struct Tableau {
    a: Vec<Vec<Rational>>,
    b: Vec<Rational>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, j: usize) {
        let p = self.a[r][j].clone();
        self.a[r].iter_mut().for_each(|v| *v /= &p);
        self.b[r] /= &p;
        let (pivot_row, pivot_b) = (self.a[r].clone(), self.b[r].clone());
        for i in 0..self.a.len() {
            if i == r || self.a[i][j].is_zero() {
                continue;
            }
            let f = self.a[i][j].clone();
            for (v, pv) in self.a[i].iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
            self.b[i] -= &f * &pivot_b;
        }
        self.basis[r] = j;
    }

    fn objective_value(&self, cost: &[Rational]) -> Rational {
        self.basis.iter().zip(&self.b).map(|(&j, v)| &cost[j] * v).sum()
    }

    /// Reduced cost of column `j`: `c_j − c_B · B⁻¹A_j`.
    fn reduced_cost(&self, cost: &[Rational], j: usize) -> Rational {
        let mut d = cost[j].clone();
        for (i, &bj) in self.basis.iter().enumerate() {
            if !cost[bj].is_zero() && !self.a[i][j].is_zero() {
                d -= &cost[bj] * &self.a[i][j];
            }
        }
        d
    }

    /// Runs simplex iterations over the allowed columns. Returns false if the
    /// objective is unbounded below.
    fn optimize(&mut self, cost: &[Rational], allowed: &dyn Fn(usize) -> bool) -> bool {
        let width = cost.len();
        loop {
            // Bland: lowest-index improving column ...
            let entering = (0..width)
                .filter(|&j| allowed(j) && !self.basis.contains(&j))
                .find(|&j| self.reduced_cost(cost, j).is_negative());
            let Some(j) = entering else { return true };
            // ... and, among minimum-ratio rows, the lowest basic index.
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.a.len() {
                if !self.a[i][j].is_positive() {
                    continue;
                }
                let ratio = &self.b[i] / &self.a[i][j];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((i, _)) => self.pivot(i, j),
                None => return false,
            }
        }
    }
}

/// `min Σ f(y_j) η_j` over measures `η` on the atoms of `ν` with
/// `μ ≤_cd η ≤ ν`. `f` is tabulated on the atoms of `ν`, in order.
pub fn min_over_eta(mu: &DiscreteMeasure, nu: &DiscreteMeasure, f: &[Rational]) -> Result<LpSolution> {
    require(mu, nu, OrderKind::PositiveConvexDecreasing)?;
    let ys: Vec<&Rational> = nu.locations().collect();
    if f.len() != ys.len() {
        return Err(Error::Domain(format!("{} test values for {} target atoms", f.len(), ys.len())));
    }
    let n = ys.len();
    let mut p = LpProblem::new(n);
    p.objective = f.to_vec();
    for (j, (_, w)) in nu.atoms().iter().enumerate() {
        let mut row = vec![Rational::zero(); n];
        row[j] = Rational::one();
        p.add_le(row, w.clone());
    }
    p.add_eq(vec![Rational::one(); n], mu.mass());
    p.add_le(ys.iter().map(|&y| y.clone()).collect(), mu.mean());
    let mut ks: Vec<&Rational> = mu.locations().chain(nu.locations()).collect();
    ks.sort();
    ks.dedup();
    for k in ks {
        let p_mu: Rational = mu.atoms().iter().map(|(x, w)| pos_part(&(k - x)) * w).sum();
        p.add_ge(ys.iter().map(|&y| pos_part(&(k - y))).collect(), p_mu);
    }
    let sol = lp_solve(&p);
    if sol.status != LpStatus::Optimal {
        return Err(Error::Internal(format!("shadow minimality LP is {:?} on a certified instance", sol.status)));
    }
    Ok(sol)
}

/// Which transport constraint the coupling LP imposes on each row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransportConstraint {
    Supermartingale,
    Martingale,
}

/// `min Σ c(x_i, y_j) p_ij` over couplings of `μ` and `ν` whose rows satisfy
/// the supermartingale (or martingale) condition. Variables are ordered
/// row-major: `p_ij` has index `i·|ν| + j`.
pub fn min_over_couplings(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &CostTable,
    constraint: TransportConstraint,
) -> Result<LpSolution> {
    match constraint {
        TransportConstraint::Supermartingale => require(mu, nu, OrderKind::ConvexDecreasing)?,
        TransportConstraint::Martingale => require(mu, nu, OrderKind::Convex)?,
    }
    let (xs, ys) = (mu.atoms(), nu.atoms());
    let (nx, ny) = (xs.len(), ys.len());
    let mut p = LpProblem::new(nx * ny);
    for (i, (x, _)) in xs.iter().enumerate() {
        for (j, (y, _)) in ys.iter().enumerate() {
            p.objective[i * ny + j] = cost.get(x, y)?;
        }
    }
    for (i, (x, w)) in xs.iter().enumerate() {
        let mut sum = vec![Rational::zero(); nx * ny];
        let mut drift = vec![Rational::zero(); nx * ny];
        for (j, (y, _)) in ys.iter().enumerate() {
            sum[i * ny + j] = Rational::one();
            drift[i * ny + j] = y - x;
        }
        p.add_eq(sum, w.clone());
        match constraint {
            TransportConstraint::Supermartingale => p.add_le(drift, Rational::zero()),
            TransportConstraint::Martingale => p.add_eq(drift, Rational::zero()),
        }
    }
    for (j, (_, v)) in ys.iter().enumerate() {
        let mut col = vec![Rational::zero(); nx * ny];
        for i in 0..nx {
            col[i * ny + j] = Rational::one();
        }
        p.add_eq(col, v.clone());
    }
    let sol = lp_solve(&p);
    if sol.status != LpStatus::Optimal {
        return Err(Error::Internal(format!("coupling LP is {:?} on an ordered instance", sol.status)));
    }
    Ok(sol)
}

/// `max Σ c(x_i, y_j) p_ij` over the same feasible set as
/// [`min_over_couplings`], solved as the minimum of the negated cost.
pub fn max_over_couplings(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &CostTable,
    constraint: TransportConstraint,
) -> Result<LpSolution> {
    let mut negated = CostTable::new();
    for x in mu.locations() {
        for y in nu.locations() {
            negated.insert(x.clone(), y.clone(), -cost.get(x, y)?);
        }
    }
    let mut sol = min_over_couplings(mu, nu, &negated, constraint)?;
    sol.value = -sol.value;
    Ok(sol)
}

/// Largest number of atoms per measure accepted by [`brute_force_pcd`].
pub const BRUTE_FORCE_MAX_ATOMS: usize = 4;

/// Decides `μ ≤_pcd ν` by enumerating every sub-measure `η ≤ ν` with weights
/// on the lattice `(1/grid_denominator)ℤ` and mass `μ(ℝ)`, and testing
/// `μ ≤_cd η` for each.
pub fn brute_force_pcd(mu: &DiscreteMeasure, nu: &DiscreteMeasure, grid_denominator: u32) -> Result<bool> {
    if mu.len() > BRUTE_FORCE_MAX_ATOMS || nu.len() > BRUTE_FORCE_MAX_ATOMS {
        return Err(Error::TooLarge(format!(
            "brute force accepts at most {BRUTE_FORCE_MAX_ATOMS} atoms per measure (got {} and {})",
            mu.len(),
            nu.len()
        )));
    }
    if grid_denominator == 0 {
        return Err(Error::Domain("grid denominator must be positive".into()));
    }
    let step = Rational::new(1.into(), grid_denominator.into());
    let target = mu.mass();
    let atoms = nu.atoms();
    let mut weights: Vec<Rational> = vec![Rational::zero(); atoms.len()];

    fn search(
        j: usize,
        atoms: &[(Rational, Rational)],
        weights: &mut Vec<Rational>,
        used: Rational,
        step: &Rational,
        target: &Rational,
        mu: &DiscreteMeasure,
    ) -> bool {
        if j == atoms.len() {
            if used != *target {
                return false;
            }
            let eta = DiscreteMeasure::new(atoms.iter().map(|(y, _)| y.clone()).zip(weights.iter().cloned()))
                .expect("nonnegative lattice weights");
            return compare(mu, &eta, OrderKind::ConvexDecreasing).is_ok();
        }
        let mut w = Rational::zero();
        while w <= atoms[j].1 && &used + &w <= *target {
            weights[j] = w.clone();
            if search(j + 1, atoms, weights, &used + &w, step, target, mu) {
                return true;
            }
            w += step;
        }
        weights[j] = Rational::zero();
        false
    }

    Ok(search(0, atoms, &mut weights, Rational::zero(), &step, &target, mu))
}
