//! Couplings of two discrete measures: the increasing supermartingale
//! coupling, the increasing and decreasing quantile couplings, costs, and an
//! exhaustive verification battery.

use std::collections::HashMap;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, QuantileSide};
use crate::num::{Ext, Rational};
use crate::order::{require, OrderKind};
use crate::pwl::put_potential;
use crate::regime;
use crate::shadow::shadow;

/// The mass sent from one source atom, as a weight times a probability law.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CouplingRow {
    pub x: Rational,
    pub weight: Rational,
    /// Conditional law of the target given the source `x`; has mass one.
    pub conditional: DiscreteMeasure,
}

/// A finitely supported measure on `ℝ²` stored as its disintegration with
/// respect to the first coordinate. Rows are sorted by source location.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Coupling {
    pub rows: Vec<CouplingRow>,
}

impl Coupling {
    /// Builds a coupling from joint masses `(x, y, p)`.
    pub fn from_joint<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Rational, Rational, Rational)>,
    {
        let mut by_x: Vec<(Rational, Vec<(Rational, Rational)>)> = Vec::new();
        let mut entries: Vec<_> = entries.into_iter().collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        for (x, y, p) in entries {
            match by_x.last_mut() {
                Some((lx, v)) if *lx == x => v.push((y, p)),
                _ => by_x.push((x, vec![(y, p)])),
            }
        }
        let mut rows = Vec::with_capacity(by_x.len());
        for (x, targets) in by_x {
            let joint = DiscreteMeasure::new(targets)?;
            let weight = joint.mass();
            if weight.is_zero() {
                continue;
            }
            let conditional = joint.scale(&weight.recip())?;
            rows.push(CouplingRow { x, weight, conditional });
        }
        Ok(Self { rows })
    }

    pub fn first_marginal(&self) -> DiscreteMeasure {
        DiscreteMeasure::new(self.rows.iter().map(|r| (r.x.clone(), r.weight.clone()))).expect("positive row weights")
    }

    pub fn second_marginal(&self) -> DiscreteMeasure {
        self.rows.iter().fold(DiscreteMeasure::zero(), |acc, r| acc.add(&r.joint()))
    }

    /// All `(x, y, mass)` triples with positive mass.
    pub fn joint(&self) -> Vec<(Rational, Rational, Rational)> {
        self.rows
            .iter()
            .flat_map(|r| r.conditional.atoms().iter().map(move |(y, p)| (r.x.clone(), y.clone(), &r.weight * p)))
            .collect()
    }

    pub fn row_at(&self, x: &Rational) -> Option<&CouplingRow> {
        self.rows.iter().find(|r| r.x == *x)
    }

    /// `Σ_i w_i Σ_j π_i(y_j) c(x_i, y_j)`.
    pub fn cost(&self, table: &CostTable) -> Result<Rational> {
        let mut total = Rational::zero();
        for (x, y, p) in self.joint() {
            total += table.get(&x, &y)? * p;
        }
        Ok(total)
    }
}

impl CouplingRow {
    /// `weight · conditional`.
    pub fn joint(&self) -> DiscreteMeasure {
        self.conditional.scale(&self.weight).expect("positive weight")
    }
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rows {
            writeln!(f, "{} × {} -> {}", r.weight, r.x, r.conditional)?;
        }
        Ok(())
    }
}

/// A cost function tabulated on pairs of support points.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CostTable {
    entries: HashMap<(Rational, Rational), Rational>,
}

impl CostTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, x: Rational, y: Rational, c: Rational) {
        self.entries.insert((x, y), c);
    }

    /// Tabulates `c` on the product of the supports of `mu` and `nu`.
    pub fn from_fn<F>(mu: &DiscreteMeasure, nu: &DiscreteMeasure, c: F) -> Self
    where
        F: Fn(&Rational, &Rational) -> Rational,
    {
        let mut t = Self::new();
        for x in mu.locations() {
            for y in nu.locations() {
                t.insert(x.clone(), y.clone(), c(x, y));
            }
        }
        t
    }

    pub fn get(&self, x: &Rational, y: &Rational) -> Result<Rational> {
        self.entries
            .get(&(x.clone(), y.clone()))
            .cloned()
            .ok_or_else(|| Error::MissingCost(format!("no cost for ({x}, {y})")))
    }
}

/// The canonical cost `c(x, y) = rank(x)·(y_max + 1 − y)²` on the supports,
/// with `rank` the 1-based rank of `x` among the atoms of `mu`. For `x₁ < x₂`
/// the difference `c(x₂,·) − c(x₁,·)` is a positive multiple of a strictly
/// decreasing, strictly convex function on the support of `nu`.
pub fn spence_mirrlees_cost(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> CostTable {
    let y_max = nu.max_atom().cloned().unwrap_or_else(Rational::zero);
    let mut t = CostTable::new();
    for (rank, x) in mu.locations().enumerate() {
        let g = Rational::from_integer((rank as i64 + 1).into());
        for y in nu.locations() {
            let h = &y_max + Rational::from_integer(1.into()) - y;
            t.insert(x.clone(), y.clone(), &g * &h * &h);
        }
    }
    t
}

/// The increasing supermartingale coupling `π_I`.
///
/// Source atoms are processed left to right; each is sent to its shadow in
/// what remains of `ν`. After every step the accumulated target equals
/// `S^ν(μ|_{(−∞, x_i]})`, which is re-checked exactly.
pub fn increasing_coupling(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Coupling> {
    require(mu, nu, OrderKind::ConvexDecreasing)?;
    let mut remaining = nu.clone();
    let mut used = DiscreteMeasure::zero();
    let mut rows = Vec::with_capacity(mu.len());
    for (x, w) in mu.atoms() {
        let piece = DiscreteMeasure::dirac(x.clone(), w.clone())?;
        let s = shadow(&piece, &remaining)?.shadow;
        remaining = remaining.sub(&s)?;
        used = used.add(&s);
        let prefix = mu.restrict(|y| y <= x);
        if shadow(&prefix, nu)?.shadow != used {
            return Err(Error::Internal(format!(
                "greedy prefix up to {x} differs from the shadow of the prefix"
            )));
        }
        rows.push(CouplingRow { x: x.clone(), weight: w.clone(), conditional: s.scale(&w.recip())? });
    }
    if !remaining.is_zero() {
        return Err(Error::Internal(format!("target mass {remaining} left unassigned")));
    }
    Ok(Coupling { rows })
}

/// The increasing quantile (Hoeffding–Fréchet) coupling, supported on `G_ν ∘ F_μ`.
pub fn quantile_coupling(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Coupling> {
    quantile_pairing(mu, nu, false)
}

/// The decreasing quantile (antitone) coupling, supported on `G_ν ∘ (1 − F_μ)`.
pub fn antitone_coupling(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Coupling> {
    quantile_pairing(mu, nu, true)
}

/// Slices both measures at the merged quantile grid and pairs slice `(a, b]`
/// of `μ` with slice `(a, b]` of `ν` (or `(m − b, m − a]` when `reversed`).
fn quantile_pairing(mu: &DiscreteMeasure, nu: &DiscreteMeasure, reversed: bool) -> Result<Coupling> {
    let total = mu.mass();
    if total != nu.mass() {
        return Err(Error::Order {
            kind: OrderKind::ConvexDecreasing,
            witness: Box::new(crate::order::Witness::MassMismatch { lhs: total, rhs: nu.mass() }),
        });
    }
    let cumulative = |m: &DiscreteMeasure| -> Vec<Rational> {
        let mut acc = Rational::zero();
        m.atoms()
            .iter()
            .map(|(_, w)| {
                acc += w;
                acc.clone()
            })
            .collect()
    };
    let mut levels: Vec<Rational> = cumulative(mu);
    if reversed {
        levels.extend(cumulative(nu).into_iter().map(|c| &total - c));
        levels.push(total.clone());
    } else {
        levels.extend(cumulative(nu));
    }
    levels.retain(|l| l.is_positive());
    levels.sort();
    levels.dedup();

    let mut entries = Vec::with_capacity(levels.len());
    let mut prev = Rational::zero();
    for b in levels {
        let x = mu.quantile(&b, QuantileSide::Left)?;
        let y = if reversed {
            nu.quantile(&(&total - &prev), QuantileSide::Left)?
        } else {
            nu.quantile(&b, QuantileSide::Left)?
        };
        entries.push((x, y, &b - &prev));
        prev = b;
    }
    Coupling::from_joint(entries)
}

/// One check of the verification battery.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub ok: bool,
    /// Describes a counterexample when `ok` is false.
    pub witness: Option<String>,
}

impl Check {
    fn pass() -> Self {
        Self { ok: true, witness: None }
    }

    fn fail(witness: impl Into<String>) -> Self {
        Self { ok: false, witness: Some(witness.into()) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub marginals: Check,
    pub supermartingale: Check,
    /// Rows at martingale points carry no drift.
    pub martingale_rows: Check,
    /// No mass crosses a zero of `D = P_ν − P_μ`.
    pub no_crossing: Check,
    /// Second-order left-monotonicity of the support.
    pub left_monotone: Check,
    /// First-order right-monotonicity of the support off the martingale points.
    pub right_monotone: Check,
}

impl VerificationReport {
    pub fn checks(&self) -> [(&'static str, &Check); 6] {
        [
            ("marginals", &self.marginals),
            ("supermartingale", &self.supermartingale),
            ("martingale_rows", &self.martingale_rows),
            ("no_crossing", &self.no_crossing),
            ("left_monotone", &self.left_monotone),
            ("right_monotone", &self.right_monotone),
        ]
    }

    pub fn all_ok(&self) -> bool {
        self.checks().iter().all(|(_, c)| c.ok)
    }
}

/// Runs every check independently; never fails.
pub fn verify(pi: &Coupling, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> VerificationReport {
    VerificationReport {
        marginals: check_marginals(pi, mu, nu),
        supermartingale: check_supermartingale(pi),
        martingale_rows: check_martingale_rows(pi, mu, nu),
        no_crossing: check_no_crossing(pi, mu, nu),
        left_monotone: check_left_monotone(pi),
        right_monotone: check_right_monotone(pi, mu, nu),
    }
}

fn check_marginals(pi: &Coupling, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Check {
    if let Some(r) = pi.rows.iter().find(|r| r.conditional.mass() != Rational::from_integer(1.into())) {
        return Check::fail(format!("row {} has conditional mass {}", r.x, r.conditional.mass()));
    }
    let (first, second) = (pi.first_marginal(), pi.second_marginal());
    if first != *mu {
        return Check::fail(format!("first marginal {first} differs from {mu}"));
    }
    if second != *nu {
        return Check::fail(format!("second marginal {second} differs from {nu}"));
    }
    Check::pass()
}

fn check_supermartingale(pi: &Coupling) -> Check {
    match pi.rows.iter().find(|r| r.conditional.mean() > r.x) {
        Some(r) => Check::fail(format!("row {} has conditional mean {} > {}", r.x, r.conditional.mean(), r.x)),
        None => Check::pass(),
    }
}

fn check_martingale_rows(pi: &Coupling, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Check {
    let u = match regime::ustar(mu, nu) {
        Ok(u) => u,
        Err(e) => return Check::fail(format!("martingale threshold unavailable: {e}")),
    };
    let x_star = match regime::threshold_from_ustar(mu, &u) {
        Ok(x) => x,
        Err(e) => return Check::fail(format!("martingale threshold unavailable: {e}")),
    };
    for r in &pi.rows {
        let x = Ext::Finite(r.x.clone());
        if x > x_star {
            break;
        }
        let full = x < x_star || mu.cdf(&r.x) <= u;
        if full {
            if r.conditional.mean() != r.x {
                return Check::fail(format!("martingale row {} has conditional mean {}", r.x, r.conditional.mean()));
            }
            continue;
        }
        // The atom at x* straddles u*: only a slice of mass u* − F(x*−) must
        // be transported as a martingale. Sub-measures of a given mass have
        // means filling the interval between the left-most and right-most
        // quantile slices, so a driftless slice exists iff x* lies in it.
        let joint = r.joint();
        let part = &u - mu.mass_below(&r.x);
        let low = match joint.lift(&part) {
            Ok(l) => l.mean(),
            Err(e) => return Check::fail(format!("straddling row {}: {e}", r.x)),
        };
        let high = match joint.lift(&(joint.mass() - &part)).and_then(|l| joint.sub(&l)) {
            Ok(h) => h.mean(),
            Err(e) => return Check::fail(format!("straddling row {}: {e}", r.x)),
        };
        let target = &r.x * &part;
        if target < low || target > high {
            return Check::fail(format!(
                "straddling row {}: no slice of mass {part} has mean {}",
                r.x, r.x
            ));
        }
    }
    Check::pass()
}

fn check_no_crossing(pi: &Coupling, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Check {
    let (Some(l), Some(r)) = (mu.min_atom(), mu.max_atom()) else {
        return Check::pass();
    };
    let d = put_potential(nu).sub(&put_potential(mu));
    let mut grid: Vec<Rational> = mu.locations().chain(nu.locations()).cloned().collect();
    grid.sort();
    grid.dedup();
    // D is linear between consecutive atoms, so its zero set is a union of
    // atoms and whole gaps; one midpoint represents each gap.
    let mids: Vec<Rational> = grid.windows(2).map(|w| (&w[0] + &w[1]) / Rational::from_integer(2.into())).collect();
    let joint = pi.joint();
    for z in grid.iter().chain(&mids) {
        if z <= l || z >= r || !d.eval(z).is_zero() {
            continue;
        }
        let crossing: Rational = joint
            .iter()
            .filter(|(x, y, _)| (x < z && y > z) || (x > z && y < z))
            .map(|(_, _, p)| p)
            .sum();
        if crossing.is_positive() {
            return Check::fail(format!("mass {crossing} crosses the zero of D at {z}"));
        }
    }
    Check::pass()
}

fn check_left_monotone(pi: &Coupling) -> Check {
    for (i, a) in pi.rows.iter().enumerate() {
        let (Some(lo), Some(hi)) = (a.conditional.min_atom(), a.conditional.max_atom()) else {
            continue;
        };
        for b in &pi.rows[i + 1..] {
            if let Some(y) = b.conditional.locations().find(|y| lo < *y && *y < hi) {
                return Check::fail(format!(
                    "({}, {lo}), ({}, {hi}) and ({}, {y}) violate left-monotonicity",
                    a.x, a.x, b.x
                ));
            }
        }
    }
    Check::pass()
}

fn check_right_monotone(pi: &Coupling, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Check {
    let x_star = match regime::martingale_points(mu, nu) {
        Ok(x) => x,
        Err(e) => return Check::fail(format!("martingale threshold unavailable: {e}")),
    };
    for (i, a) in pi.rows.iter().enumerate() {
        if Ext::Finite(a.x.clone()) <= x_star {
            continue;
        }
        let Some(lo) = a.conditional.min_atom() else { continue };
        for b in &pi.rows[i + 1..] {
            if let Some(hi) = b.conditional.max_atom() {
                if hi > lo {
                    return Check::fail(format!(
                        "({}, {lo}) and ({}, {hi}) violate right-monotonicity",
                        a.x, b.x
                    ));
                }
            }
        }
    }
    Check::pass()
}
