//! Decision procedures for the stochastic orders between discrete measures,
//! and the maximal element `T^ν(μ)`.
//!
//! Every comparison reduces to sign checks of piecewise-linear differences of
//! potentials at finitely many breakpoints, so all verdicts are exact. A
//! failed comparison always carries a [`Witness`].

// A `Verdict` hands its witness back by value: the witness is the payload
// callers inspect, and `Error::Order` boxes it once it leaves this module.
#![allow(clippy::result_large_err)]

use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, QuantileSide};
use crate::num::{Ext, Rational};
use crate::pwl::{call_potential, put_potential, PwlFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OrderKind {
    /// `η(A) <= χ(A)` for every set `A`.
    Pointwise,
    /// Convex order: equal mass, equal mean, `P_η <= P_χ`.
    Convex,
    /// Convex-decreasing order: equal mass and `P_η <= P_χ`.
    ConvexDecreasing,
    /// Positive convex order (test functions convex and nonnegative).
    PositiveConvex,
    /// Positive convex-decreasing order (test functions convex, nonincreasing, nonnegative).
    PositiveConvexDecreasing,
}

impl OrderKind {
    pub const ALL: [OrderKind; 5] = [
        OrderKind::Pointwise,
        OrderKind::Convex,
        OrderKind::ConvexDecreasing,
        OrderKind::PositiveConvex,
        OrderKind::PositiveConvexDecreasing,
    ];
}

/// Why a comparison `a ≤ b` failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// `a({x}) = lhs > rhs = b({x})`.
    AtomExcess { x: Rational, lhs: Rational, rhs: Rational },
    /// Total masses differ (orders requiring equal mass).
    MassMismatch { lhs: Rational, rhs: Rational },
    /// `mass(a) = lhs > rhs = mass(b)` (positive orders).
    MassExcess { lhs: Rational, rhs: Rational },
    /// First moments differ (convex order).
    MeanMismatch { lhs: Rational, rhs: Rational },
    /// `P_a(k) = lhs > rhs = P_b(k)`.
    PutPotential { k: Ext, lhs: Rational, rhs: Rational },
    /// `C_a(k) − C_b(k) = excess > 0`.
    CallPotential { k: Rational, excess: Rational },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::AtomExcess { x, lhs, rhs } => write!(f, "atom at {x}: {lhs} > {rhs}"),
            Witness::MassMismatch { lhs, rhs } => write!(f, "masses differ: {lhs} vs {rhs}"),
            Witness::MassExcess { lhs, rhs } => write!(f, "mass {lhs} exceeds {rhs}"),
            Witness::MeanMismatch { lhs, rhs } => write!(f, "means differ: {lhs} vs {rhs}"),
            Witness::PutPotential { k, lhs, rhs } => write!(f, "put potential at {k}: {lhs} > {rhs}"),
            Witness::CallPotential { k, excess } => write!(f, "call potential at {k} exceeds by {excess}"),
        }
    }
}

/// The outcome of [`compare`]: `Ok(())` when the order holds.
pub type Verdict = std::result::Result<(), Witness>;

/// Decides `a ≤ b` in the order `kind`.
pub fn compare(a: &DiscreteMeasure, b: &DiscreteMeasure, kind: OrderKind) -> Verdict {
    match kind {
        OrderKind::Pointwise => pointwise(a, b),
        OrderKind::ConvexDecreasing => convex_decreasing(a, b),
        OrderKind::Convex => {
            convex_decreasing(a, b)?;
            let (ma, mb) = (a.mean(), b.mean());
            if ma != mb {
                return Err(Witness::MeanMismatch { lhs: ma, rhs: mb });
            }
            Ok(())
        }
        OrderKind::PositiveConvexDecreasing => positive_convex_decreasing(a, b),
        OrderKind::PositiveConvex => {
            positive_convex_decreasing(a, b)?;
            let (ca, cb) = (call_potential(a), call_potential(b));
            match PwlFunction::sup_difference(&ca, &cb) {
                Ext::Finite(s) if !s.is_positive() => Ok(()),
                Ext::Finite(s) => Err(Witness::CallPotential {
                    k: PwlFunction::argmax_difference(&ca, &cb).expect("finite supremum is attained"),
                    excess: s,
                }),
                // Unreachable once pcd holds (mass(a) <= mass(b)), kept total for safety.
                _ => Err(Witness::MassExcess { lhs: a.mass(), rhs: b.mass() }),
            }
        }
    }
}

/// [`compare`] lifted into the crate error type.
pub fn require(a: &DiscreteMeasure, b: &DiscreteMeasure, kind: OrderKind) -> Result<()> {
    compare(a, b, kind).map_err(|witness| Error::Order { kind, witness: Box::new(witness) })
}

fn pointwise(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Verdict {
    for (x, w) in a.atoms() {
        let bw = b.weight_at(x);
        if *w > bw {
            return Err(Witness::AtomExcess { x: x.clone(), lhs: w.clone(), rhs: bw });
        }
    }
    Ok(())
}

fn convex_decreasing(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Verdict {
    let (ma, mb) = (a.mass(), b.mass());
    if ma != mb {
        return Err(Witness::MassMismatch { lhs: ma, rhs: mb });
    }
    // With equal masses P_b − P_a vanishes on the left tail and is constant on
    // the right tail, so its minimum sits at one of its breakpoints.
    let (pa, pb) = (put_potential(a), put_potential(b));
    let d = pb.sub(&pa);
    match d.points().iter().find(|(_, v)| v.is_negative()) {
        Some((k, _)) => Err(Witness::PutPotential {
            k: Ext::Finite(k.clone()),
            lhs: pa.eval(k),
            rhs: pb.eval(k),
        }),
        None => Ok(()),
    }
}

fn positive_convex_decreasing(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Verdict {
    let (ma, mb) = (a.mass(), b.mass());
    if ma > mb {
        return Err(Witness::MassExcess { lhs: ma, rhs: mb });
    }
    let t = maximal_element(a, b).expect("mass condition checked above");
    convex_decreasing(a, &t)
}

/// `T^ν(μ)`: the left-most sub-measure of `ν` with the mass of `μ`.
pub fn maximal_element(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    maximal_element_with(mu, nu, QuantileSide::Left)
}

/// `T^ν(μ)` computed with the chosen quantile convention; both conventions
/// give the same measure.
pub fn maximal_element_with(mu: &DiscreteMeasure, nu: &DiscreteMeasure, side: QuantileSide) -> Result<DiscreteMeasure> {
    let (m, mn) = (mu.mass(), nu.mass());
    if m > mn {
        return Err(Error::Domain(format!("mass {m} exceeds the target mass {mn}")));
    }
    match side {
        QuantileSide::Left => nu.lift(&m),
        QuantileSide::Right => {
            if m == mn {
                return Ok(nu.clone());
            }
            let g = nu.quantile(&m, QuantileSide::Right)?;
            let below = nu.restrict(|x| *x < g);
            let top = &m - below.mass();
            Ok(below.add(&DiscreteMeasure::dirac(g, top)?))
        }
    }
}

/// The sufficient mass condition for `η ≤_pc χ` when the supports are
/// disjoint: `0 < η(ℝ) ≤ min(χ((−∞, ℓ_η]), χ([r_η, ∞)))`.
pub fn disjoint_support_pc(eta: &DiscreteMeasure, chi: &DiscreteMeasure) -> Result<bool> {
    if let Some(x) = eta.locations().find(|x| !chi.weight_at(x).is_zero()) {
        return Err(Error::Domain(format!("supports overlap at {x}")));
    }
    let (Some(l), Some(r)) = (eta.min_atom(), eta.max_atom()) else {
        return Ok(false);
    };
    let left = chi.cdf(l);
    let right = chi.mass() - chi.mass_below(r);
    let m = eta.mass();
    Ok(m.is_positive() && m <= left.min(right))
}
