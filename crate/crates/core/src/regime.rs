//! The excess curve `c(u)`, the regime-switching level `u*`, and the
//! irreducible decomposition of a convex-decreasing pair.
//!
//! `c(u) = sup_k (C_{μ_u}(k) − C_ν(k)) ∨ 0` measures how far the quantile
//! lift `μ_u` is from being embeddable into `ν` as a martingale. `u*` is the
//! last level at which it vanishes.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, QuantileSide};
use crate::num::{pos_part, Ext, Rational};
use crate::order::{compare, require, OrderKind};
use crate::pwl::{call_potential, put_potential, PwlFunction};
use crate::shadow::shadow;

/// `c(u)` for `0 <= u <= mass(μ)`. Requires `μ ≤_cd ν`.
pub fn c_of(mu: &DiscreteMeasure, nu: &DiscreteMeasure, u: &Rational) -> Result<Rational> {
    require(mu, nu, OrderKind::ConvexDecreasing)?;
    excess_at(mu, nu, u)
}

/// `c(u)` without re-checking the order between `μ` and `ν`.
fn excess_at(mu: &DiscreteMeasure, nu: &DiscreteMeasure, u: &Rational) -> Result<Rational> {
    let mu_u = mu.lift(u)?;
    let c = match PwlFunction::sup_difference(&call_potential(&mu_u), &call_potential(nu)) {
        Ext::Finite(s) => s.max(Rational::zero()),
        other => return Err(Error::Internal(format!("c({u}) evaluated to {other}"))),
    };
    if cfg!(debug_assertions) {
        let via_shadow = mu_u.mean() - shadow(&mu_u, nu)?.shadow.mean();
        if via_shadow != c {
            return Err(Error::Internal(format!(
                "c({u}) = {c} disagrees with the shadow representation {via_shadow}"
            )));
        }
    }
    Ok(c)
}

/// The regime-switching level `u* = sup{u : c(u) = 0}` (with `sup ∅ = 0`).
///
/// On the quantile interval of each atom `x_i` of `μ`, `C_{μ_u}(k)` is affine
/// in `u` at every fixed breakpoint `k`, so `c` is a maximum of affine
/// functions of `u` there and its last zero is found in closed form.
pub fn ustar(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Rational> {
    require(mu, nu, OrderKind::ConvexDecreasing)?;
    let total = mu.mass();
    let u = if mu.mean() == nu.mean() {
        total.clone()
    } else if supports_separated(mu, nu) {
        Rational::zero()
    } else {
        solve_ustar(mu, nu)?
    };

    // Certificates: c vanishes at u* and is positive at levels approaching it from above.
    if !excess_at(mu, nu, &u)?.is_zero() {
        return Err(Error::Internal(format!("c(u*) is not zero at u* = {u}")));
    }
    if u < total {
        let mut step = &total - &u;
        for j in 1..=10 {
            step /= Rational::from_integer(2.into());
            let v = &u + &step;
            if !excess_at(mu, nu, &v)?.is_positive() {
                return Err(Error::Internal(format!("c vanishes at {v} > u* = {u} (j = {j})")));
            }
        }
    }
    Ok(u)
}

/// `left` lies weakly to the left of `right` and they do not both charge the
/// junction point; for discrete measures this is strict separation.
fn supports_separated(right: &DiscreteMeasure, left: &DiscreteMeasure) -> bool {
    match (left.max_atom(), right.min_atom()) {
        (Some(hi), Some(lo)) => hi < lo,
        _ => true,
    }
}

/// The support-separation certificate at level `u`: what remains of `ν`
/// after embedding `μ_u` lies to the left of what remains of `μ`, with no
/// shared atom at the junction.
pub fn separation_certificate(mu: &DiscreteMeasure, nu: &DiscreteMeasure, u: &Rational) -> Result<bool> {
    require(mu, nu, OrderKind::ConvexDecreasing)?;
    let mu_u = mu.lift(u)?;
    let rest_nu = nu.sub(&shadow(&mu_u, nu)?.shadow)?;
    let rest_mu = mu.sub(&mu_u)?;
    Ok(supports_separated(&rest_mu, &rest_nu))
}

fn solve_ustar(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Rational> {
    let c_nu = call_potential(nu);
    let mut u_lo = Rational::zero();
    for (i, (x, w)) in mu.atoms().iter().enumerate() {
        let u_hi = &u_lo + w;
        if excess_at(mu, nu, &u_hi)?.is_zero() {
            u_lo = u_hi;
            continue;
        }
        // μ_u = μ_{u_lo} + (u − u_lo)δ_x for u in [u_lo, u_hi].
        let base = mu.lift(&u_lo)?;
        let c_base = call_potential(&base);
        let ks = mu.atoms()[..=i].iter().map(|(k, _)| k).chain(nu.locations());
        let mut best: Option<Rational> = None;
        for k in ks {
            let b = pos_part(&(x - k));
            if !b.is_positive() {
                continue;
            }
            let a = c_base.eval(k) - c_nu.eval(k) - &u_lo * &b;
            let root = -a / b;
            if best.as_ref().is_none_or(|r| root < *r) {
                best = Some(root);
            }
        }
        let root = best.ok_or_else(|| Error::Internal("c grows on an interval without active breakpoints".into()))?;
        return Ok(root.max(u_lo));
    }
    Ok(u_lo)
}

/// One interval of the irreducible decomposition together with the pair of
/// measures living on it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub left: Ext,
    pub right: Ext,
    /// `μ` restricted to the open interval.
    pub mu: DiscreteMeasure,
    /// `ν` restricted to the open interval plus boundary masses.
    pub nu: DiscreteMeasure,
    /// Mass taken from `ν({left})`.
    pub alpha: Rational,
    /// Mass taken from `ν({right})`.
    pub beta: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IrreducibleDecomposition {
    /// Left end of the supermartingale component; `+inf` when the means agree.
    pub x_star: Ext,
    /// The component `(x_star, ∞)`, if present.
    pub supermartingale: Option<Component>,
    /// Bounded components on which the pair is in convex order.
    pub martingale: Vec<Component>,
    /// The part of `μ` (equal to the corresponding part of `ν`) that does not move.
    pub fixed_part: DiscreteMeasure,
}

/// Splits `(μ, ν)` along the zeros of `D = P_ν − P_μ`. Requires `μ ≤_cd ν`.
pub fn decompose(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<IrreducibleDecomposition> {
    require(mu, nu, OrderKind::ConvexDecreasing)?;
    let d = put_potential(nu).sub(&put_potential(mu));
    let mut grid: Vec<Rational> = mu.locations().chain(nu.locations()).cloned().collect();
    grid.sort();
    grid.dedup();
    if grid.is_empty() {
        return Ok(IrreducibleDecomposition {
            x_star: Ext::PosInf,
            supermartingale: None,
            martingale: Vec::new(),
            fixed_part: DiscreteMeasure::zero(),
        });
    }
    let values: Vec<Rational> = grid.iter().map(|k| d.eval(k)).collect();

    // Runs of positivity between consecutive zeros of D on the grid. D is
    // linear between grid points and vanishes left of the grid.
    let mut intervals: Vec<(Rational, Option<Rational>)> = Vec::new();
    let mut open: Option<Rational> = None;
    for (k, v) in grid.iter().zip(&values) {
        if v.is_zero() {
            if let Some(l) = open.take() {
                intervals.push((l, Some(k.clone())));
            }
        } else if open.is_none() {
            let idx = grid.iter().position(|g| g == k).expect("grid point");
            open = Some(grid[idx - 1].clone());
        }
    }
    if let Some(l) = open {
        intervals.push((l, None));
    }

    let fail = |what: String| Err(Error::Internal(format!("decomposition of ({mu}, {nu}): {what}")));
    let mut martingale = Vec::new();
    let mut supermartingale = None;
    let mut x_star = Ext::PosInf;
    for (l, r) in intervals {
        let mu_i = mu.restrict(|x| *x > l && r.as_ref().is_none_or(|r| x < r));
        let nu_in = nu.restrict(|x| *x > l && r.as_ref().is_none_or(|r| x < r));
        let dm = mu_i.mass() - nu_in.mass();
        match r {
            Some(r) => {
                let dmean = mu_i.mean() - nu_in.mean();
                let beta = (&dmean - &l * &dm) / (&r - &l);
                let alpha = &dm - &beta;
                if alpha.is_negative() || beta.is_negative() || alpha > nu.weight_at(&l) || beta > nu.weight_at(&r) {
                    return fail(format!("boundary split ({alpha}, {beta}) infeasible on ({l}, {r})"));
                }
                let nu_i = nu_in
                    .add(&DiscreteMeasure::dirac(l.clone(), alpha.clone())?)
                    .add(&DiscreteMeasure::dirac(r.clone(), beta.clone())?);
                if compare(&mu_i, &nu_i, OrderKind::Convex).is_err() {
                    return fail(format!("component ({l}, {r}) is not in convex order"));
                }
                martingale.push(Component {
                    left: Ext::Finite(l),
                    right: Ext::Finite(r),
                    mu: mu_i,
                    nu: nu_i,
                    alpha,
                    beta,
                });
            }
            None => {
                let alpha = dm;
                if alpha.is_negative() || alpha > nu.weight_at(&l) {
                    return fail(format!("boundary mass {alpha} infeasible at {l}"));
                }
                let nu_0 = nu_in.add(&DiscreteMeasure::dirac(l.clone(), alpha.clone())?);
                if compare(&mu_i, &nu_0, OrderKind::ConvexDecreasing).is_err() {
                    return fail("supermartingale component is not in convex-decreasing order".into());
                }
                x_star = Ext::Finite(l.clone());
                supermartingale = Some(Component {
                    left: Ext::Finite(l),
                    right: Ext::PosInf,
                    mu: mu_i,
                    nu: nu_0,
                    alpha,
                    beta: Rational::zero(),
                });
            }
        }
    }

    let moving_mu = martingale.iter().chain(supermartingale.iter()).fold(DiscreteMeasure::zero(), |acc, c| acc.add(&c.mu));
    let moving_nu = martingale.iter().chain(supermartingale.iter()).fold(DiscreteMeasure::zero(), |acc, c| acc.add(&c.nu));
    let fixed_part = mu.sub(&moving_mu)?;
    match nu.sub(&moving_nu) {
        Ok(rest) if rest == fixed_part => {}
        _ => return fail("components do not reassemble the target".into()),
    }
    for c in martingale.iter().chain(supermartingale.iter()) {
        let dc = put_potential(&c.nu).sub(&put_potential(&c.mu));
        let inside = |k: &Rational| Ext::Finite(k.clone()) > c.left && Ext::Finite(k.clone()) < c.right;
        for w in grid.windows(2) {
            let mid = (&w[0] + &w[1]) / Rational::from_integer(2.into());
            for k in [&w[0], &w[1], &mid] {
                let v = dc.eval(k);
                if inside(k) != v.is_positive() {
                    return fail(format!("component potential gap has the wrong sign at {k}"));
                }
            }
        }
    }
    Ok(IrreducibleDecomposition { x_star, supermartingale, martingale, fixed_part })
}

/// The threshold `x* = G⁻_μ(u*)` below which `μ` is transported as a
/// martingale; `-inf` when `u* = 0` and `+inf` when `u* = mass(μ)`.
pub fn martingale_points(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Ext> {
    let u = ustar(mu, nu)?;
    threshold_from_ustar(mu, &u)
}

pub(crate) fn threshold_from_ustar(mu: &DiscreteMeasure, u: &Rational) -> Result<Ext> {
    if u.is_zero() {
        Ok(Ext::NegInf)
    } else if *u == mu.mass() {
        Ok(Ext::PosInf)
    } else {
        Ok(Ext::Finite(mu.quantile(u, QuantileSide::Left)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat};

    fn m(atoms: &[(i64, i64, i64)]) -> DiscreteMeasure {
        DiscreteMeasure::new(atoms.iter().map(|&(x, p, q)| (int(x), rat(p, q)))).unwrap()
    }

    fn ex1() -> (DiscreteMeasure, DiscreteMeasure) {
        (m(&[(0, 1, 1)]), m(&[(-2, 1, 2), (1, 1, 2)]))
    }

    fn w() -> (DiscreteMeasure, DiscreteMeasure) {
        (m(&[(-1, 1, 2), (1, 1, 2)]), m(&[(-2, 1, 2), (0, 1, 2)]))
    }

    #[test]
    fn c_examples() {
        let (mu, nu) = ex1();
        assert_eq!(c_of(&mu, &nu, &int(0)).unwrap(), int(0));
        assert_eq!(c_of(&mu, &nu, &int(1)).unwrap(), rat(1, 2));
        let (mu, nu) = w();
        assert_eq!(c_of(&mu, &nu, &rat(1, 2)).unwrap(), int(0));
        assert_eq!(c_of(&mu, &nu, &int(1)).unwrap(), int(1));
        assert!(c_of(&nu, &mu, &rat(1, 2)).is_err());
    }

    #[test]
    fn ustar_examples() {
        let (mu, nu) = ex1();
        assert_eq!(ustar(&mu, &nu).unwrap(), rat(3, 4));
        let (mu, nu) = w();
        assert_eq!(ustar(&mu, &nu).unwrap(), rat(1, 2));
        let eq = (m(&[(0, 1, 1)]), m(&[(-1, 1, 2), (1, 1, 2)]));
        assert_eq!(ustar(&eq.0, &eq.1).unwrap(), int(1));
        let sep = (m(&[(1, 1, 2), (2, 1, 2)]), m(&[(-1, 1, 2), (0, 1, 2)]));
        assert_eq!(ustar(&sep.0, &sep.1).unwrap(), int(0));
    }

    #[test]
    fn separation_certificate_at_ustar() {
        let (mu, nu) = ex1();
        assert!(separation_certificate(&mu, &nu, &rat(3, 4)).unwrap());
        assert!(!separation_certificate(&mu, &nu, &rat(1, 2)).unwrap());
        let (mu, nu) = w();
        assert!(separation_certificate(&mu, &nu, &rat(1, 2)).unwrap());
    }

    #[test]
    fn decompose_examples() {
        let d = decompose(&m(&[(0, 1, 1)]), &m(&[(0, 1, 1)])).unwrap();
        assert_eq!(d.x_star, Ext::PosInf);
        assert!(d.martingale.is_empty() && d.supermartingale.is_none());
        assert_eq!(d.fixed_part, m(&[(0, 1, 1)]));

        let d = decompose(&m(&[(0, 1, 1)]), &m(&[(-1, 1, 2), (1, 1, 2)])).unwrap();
        assert_eq!(d.x_star, Ext::PosInf);
        assert!(d.supermartingale.is_none());
        assert_eq!(d.martingale.len(), 1);
        let c = &d.martingale[0];
        assert_eq!((c.left.clone(), c.right.clone()), (Ext::Finite(int(-1)), Ext::Finite(int(1))));
        assert_eq!((c.alpha.clone(), c.beta.clone()), (rat(1, 2), rat(1, 2)));

        let (mu, nu) = w();
        let d = decompose(&mu, &nu).unwrap();
        assert_eq!(d.x_star, Ext::Finite(int(-2)));
        assert!(d.martingale.is_empty());
        let s = d.supermartingale.unwrap();
        assert_eq!((s.mu, s.nu), (mu, nu));
        assert!(d.fixed_part.is_zero());
    }

    #[test]
    fn decompose_with_fixed_atom_and_three_components() {
        // D vanishes at 0 where both measures keep an atom of mass 1/4.
        let mu = m(&[(-1, 1, 4), (0, 1, 4), (1, 1, 4), (3, 1, 4)]);
        let nu = m(&[(-2, 1, 8), (0, 1, 2), (2, 1, 4), (4, 1, 8)]);
        let d = decompose(&mu, &nu).unwrap();
        assert_eq!(d.martingale.len(), 3, "{d:?}");
        assert_eq!(d.fixed_part, m(&[(0, 1, 4)]));
    }

    #[test]
    fn martingale_points_examples() {
        let eq = (m(&[(0, 1, 1)]), m(&[(-1, 1, 2), (1, 1, 2)]));
        assert_eq!(martingale_points(&eq.0, &eq.1).unwrap(), Ext::PosInf);
        let (mu, nu) = w();
        assert_eq!(martingale_points(&mu, &nu).unwrap(), Ext::Finite(int(-1)));
        let sep = (m(&[(1, 1, 2), (2, 1, 2)]), m(&[(-1, 1, 2), (0, 1, 2)]));
        assert_eq!(martingale_points(&sep.0, &sep.1).unwrap(), Ext::NegInf);
    }
}
