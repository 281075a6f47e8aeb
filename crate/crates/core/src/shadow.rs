//! The shadow `S^ν(μ)` of `μ` in `ν`: the convex-decreasing-smallest measure
//! `η` with `μ ≤_cd η ≤ ν`, computed through the potential formula
//! `P_{S^ν(μ)} = P_ν − (P_ν − P_μ)^c`.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::num::{Ext, Rational};
use crate::oracle;
use crate::order::{compare, require, OrderKind};
use crate::pwl::{call_potential, put_potential, PwlFunction};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShadowResult {
    pub shadow: DiscreteMeasure,
    /// `(P_ν − P_μ)^c`.
    pub hull: PwlFunction,
    /// `c_{μ,ν} = mean(μ) − mean(S^ν(μ)) ≥ 0`.
    pub excess: Rational,
}

/// Computes `S^ν(μ)`. Requires `μ ≤_pcd ν`; every invariant of the result is
/// re-checked exactly before returning.
pub fn shadow(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<ShadowResult> {
    require(mu, nu, OrderKind::PositiveConvexDecreasing)?;
    let p_nu = put_potential(nu);
    let hull = p_nu.sub(&put_potential(mu)).convex_hull()?;
    let shadow = p_nu.sub(&hull).measure_of()?;
    let excess = mu.mean() - shadow.mean();

    let fail = |what: &str| Err(Error::Internal(format!("shadow of {mu} in {nu}: {what}")));
    if shadow.mass() != mu.mass() {
        return fail("mass not preserved");
    }
    if excess.is_negative() {
        return fail("negative excess");
    }
    if compare(&shadow, nu, OrderKind::Pointwise).is_err() {
        return fail("not dominated by the target");
    }
    if compare(mu, &shadow, OrderKind::ConvexDecreasing).is_err() {
        return fail("source not convex-decreasing dominated");
    }
    let sup = match PwlFunction::sup_difference(&call_potential(mu), &call_potential(nu)) {
        Ext::Finite(s) => s.max(Rational::zero()),
        other => return fail(&format!("call-potential excess is {other}")),
    };
    if sup != excess {
        return fail("excess disagrees with the call-potential supremum");
    }
    Ok(ShadowResult { shadow, hull, excess })
}

/// Certifies the minimality of a computed shadow: for every atom `k` of `ν`,
/// `∫(k − y)⁺ dS^ν(μ)` must equal the LP minimum of `∫(k − y)⁺ dη` over all
/// `η` with `μ ≤_cd η ≤ ν`.
pub fn shadow_is_minimal(mu: &DiscreteMeasure, nu: &DiscreteMeasure, result: &ShadowResult) -> Result<bool> {
    for k in nu.locations() {
        let f: Vec<Rational> = nu.locations().map(|y| crate::num::pos_part(&(k - y))).collect();
        let lp = oracle::min_over_eta(mu, nu, &f)?;
        let own: Rational = result
            .shadow
            .atoms()
            .iter()
            .map(|(y, w)| crate::num::pos_part(&(k - y)) * w)
            .sum();
        if own != lp.value {
            return Ok(false);
        }
    }
    Ok(true)
}
