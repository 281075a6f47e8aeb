//! Pointwise evaluation of the functions `(R, S, T)` and the slope `φ` that
//! represent the increasing supermartingale coupling on the quantile scale.
//!
//! For `u <= u*` the coupling sends the quantile slice at `u` to the
//! two-point law on `{R(u), S(u)}` with mean `G(u)`; these are computed from
//! the convex hull of `E = P_{ν_i} − P_{(μ_i)_v}` on the irreducible component
//! of `(μ_{u*}, S^ν(μ_{u*}))` containing `G(u)`. For `u > u*` the slice is
//! sent deterministically to `T(u) = G⁻_{ν̃}(1 − u)` with `ν̃ = ν − S^ν(μ_{u*})`.
//!
//! Quantile levels run over `(0, m)` with `m` the common mass; for
//! probability measures `m = 1` and `1 − u` is `m − u`.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, QuantileSide};
use crate::num::{Ext, Rational};
use crate::order::{require, OrderKind};
use crate::pwl::{put_potential, PwlFunction};
use crate::regime::{decompose, ustar};
use crate::shadow::shadow;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    /// `u <= u*`: the slice is embedded as a martingale.
    Martingale,
    /// `u > u*`: the slice moves deterministically downward.
    Supermartingale,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Martingale => "martingale",
            Region::Supermartingale => "supermartingale",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportTriple {
    pub u: Rational,
    pub region: Region,
    /// `G⁻_μ(u)`.
    pub g: Rational,
    pub r: Option<Rational>,
    pub s: Option<Rational>,
    pub t: Option<Rational>,
    pub phi: Option<Rational>,
}

/// `χ_{c,x,d}`: the law on `{c, d}` with mean `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoPointKernel {
    pub lower: Rational,
    pub center: Rational,
    pub upper: Rational,
    pub law: DiscreteMeasure,
}

impl TwoPointKernel {
    /// Requires `lower <= center <= upper`.
    pub fn new(lower: Rational, center: Rational, upper: Rational) -> Result<Self> {
        if lower > center || center > upper {
            return Err(Error::Domain(format!("kernel points out of order: {lower}, {center}, {upper}")));
        }
        let law = if (&upper - &center).is_zero() || (&center - &lower).is_zero() {
            DiscreteMeasure::dirac(center.clone(), Rational::from_integer(1.into()))?
        } else {
            let span = &upper - &lower;
            DiscreteMeasure::new([
                (lower.clone(), (&upper - &center) / &span),
                (upper.clone(), (&center - &lower) / &span),
            ])?
        };
        Ok(Self { lower, center, upper, law })
    }
}

/// One irreducible component of `(μ_{u*}, S^ν(μ_{u*}))` with its quantile window.
#[derive(Clone, Debug)]
struct Window {
    left: Rational,
    right: Rational,
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    d: PwlFunction,
    /// `F(ℓ)`.
    u_left: Rational,
    /// `μ((−∞, r))`.
    u_right: Rational,
}

/// Cached data shared by every evaluation on one instance.
#[derive(Clone, Debug)]
pub struct SupportCurves {
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    mass: Rational,
    u_star: Rational,
    mu_star: DiscreteMeasure,
    shadow_star: DiscreteMeasure,
    nu_tilde: DiscreteMeasure,
    windows: Vec<Window>,
}

impl SupportCurves {
    /// Precomputes `u*`, `μ_{u*}`, its shadow and their decomposition.
    /// Requires `μ ≤_cd ν`.
    pub fn new(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Self> {
        require(mu, nu, OrderKind::ConvexDecreasing)?;
        let u_star = ustar(mu, nu)?;
        let mu_star = mu.lift(&u_star)?;
        let shadow_star = shadow(&mu_star, nu)?.shadow;
        let nu_tilde = nu.sub(&shadow_star)?;
        let dec = decompose(&mu_star, &shadow_star)?;
        if dec.supermartingale.is_some() {
            return Err(Error::Internal("the pair at u* has unequal means".into()));
        }
        let mut windows = Vec::with_capacity(dec.martingale.len());
        for c in dec.martingale {
            let left = c.left.expect_finite("component left end")?;
            let right = c.right.expect_finite("component right end")?;
            let d = put_potential(&c.nu).sub(&put_potential(&c.mu));
            windows.push(Window {
                u_left: mu_star.cdf(&left),
                u_right: mu_star.mass_below(&right),
                left,
                right,
                mu: c.mu,
                nu: c.nu,
                d,
            });
        }
        Ok(Self {
            mu: mu.clone(),
            nu: nu.clone(),
            mass: mu.mass(),
            u_star,
            mu_star,
            shadow_star,
            nu_tilde,
            windows,
        })
    }

    pub fn u_star(&self) -> &Rational {
        &self.u_star
    }

    pub fn mass(&self) -> &Rational {
        &self.mass
    }

    /// `ν − S^ν(μ_{u*})`.
    pub fn nu_tilde(&self) -> &DiscreteMeasure {
        &self.nu_tilde
    }

    pub fn mu_star(&self) -> &DiscreteMeasure {
        &self.mu_star
    }

    pub fn shadow_star(&self) -> &DiscreteMeasure {
        &self.shadow_star
    }

    /// Quantile windows `(u^ℓ_i, u^r_i)` and component intervals `(ℓ_i, r_i)`.
    pub fn components(&self) -> Vec<((Rational, Rational), (Rational, Rational))> {
        self.windows
            .iter()
            .map(|w| ((w.u_left.clone(), w.u_right.clone()), (w.left.clone(), w.right.clone())))
            .collect()
    }

    /// The levels `u^r_i` with `G(u^r_i) < r_i`, where `(R, S) = (ℓ_i, r_i)`.
    pub fn null_levels(&self) -> Vec<Rational> {
        self.windows
            .iter()
            .filter(|w| self.is_null_level(w))
            .map(|w| w.u_right.clone())
            .collect()
    }

    fn is_null_level(&self, w: &Window) -> bool {
        w.u_right.is_positive()
            && w.u_right < self.mass
            && self
                .mu_star
                .quantile(&w.u_right, QuantileSide::Left)
                .is_ok_and(|g| g < w.right)
    }

    /// Levels where the combinatorics of `(R, S)` may change: the window
    /// ends, `u*`, and the cumulative masses of `μ`.
    pub fn combinatorial_levels(&self) -> Vec<Rational> {
        let mut v: Vec<Rational> = Vec::new();
        for w in &self.windows {
            v.push(w.u_left.clone());
            v.push(w.u_right.clone());
        }
        v.push(self.u_star.clone());
        let mut acc = Rational::zero();
        for (_, w) in self.mu.atoms() {
            acc += w;
            v.push(acc.clone());
        }
        v.retain(|u| u.is_positive() && *u < self.mass);
        v.sort();
        v.dedup();
        v
    }

    fn check_level(&self, u: &Rational) -> Result<()> {
        if !u.is_positive() || *u >= self.mass {
            return Err(Error::Domain(format!("quantile level {u} outside (0, {})", self.mass)));
        }
        Ok(())
    }

    /// Slope of `(P_ν − P_{μ_u})^c` at `G(u)` (smallest subgradient).
    fn global_slope(&self, u: &Rational, g: &Rational) -> Result<Rational> {
        let e = put_potential(&self.nu).sub(&put_potential(&self.mu.lift(u)?));
        e.convex_hull()?.min_subgradient(g)
    }

    /// Evaluates `(G, R, S, T, φ)` at level `u ∈ (0, m)`.
    pub fn triple_at(&self, u: &Rational) -> Result<SupportTriple> {
        self.check_level(u)?;
        let g = self.mu.quantile(u, QuantileSide::Left)?;
        if *u > self.u_star {
            let level = &self.mass - u;
            let t = self.nu_tilde.quantile(&level, QuantileSide::Left)?;
            let phi = self.global_slope(u, &g)?;
            return Ok(SupportTriple {
                u: u.clone(),
                region: Region::Supermartingale,
                g,
                r: None,
                s: None,
                t: Some(t),
                phi: Some(phi),
            });
        }
        let martingale = |r: Rational, s: Rational, phi: Rational| SupportTriple {
            u: u.clone(),
            region: Region::Martingale,
            g: g.clone(),
            r: Some(r),
            s: Some(s),
            t: None,
            phi: Some(phi),
        };
        if let Some(w) = self.windows.iter().find(|w| w.u_left < *u && *u < w.u_right) {
            let (r, s, phi) = self.component_triple(w, u, &g)?;
            return Ok(martingale(r, s, phi));
        }
        if let Some(w) = self.windows.iter().find(|w| w.u_right == *u && self.is_null_level(w)) {
            let phi = self.global_slope(u, &g)?;
            return Ok(martingale(w.left.clone(), w.right.clone(), phi));
        }
        let phi = self.global_slope(u, &g)?;
        Ok(martingale(g.clone(), g.clone(), phi))
    }

    /// `(R_i, S_i, φ_i)` at the local level `u − u^ℓ_i` of a component.
    fn component_triple(&self, w: &Window, u: &Rational, g: &Rational) -> Result<(Rational, Rational, Rational)> {
        let v = u - &w.u_left;
        let local_g = w.mu.quantile(&v, QuantileSide::Left)?;
        if local_g != *g {
            return Err(Error::Internal(format!("component quantile {local_g} differs from G({u}) = {g}")));
        }
        let e = put_potential(&w.nu).sub(&put_potential(&w.mu.lift(&v)?));
        let hull = e.convex_hull()?;
        let contact = e.contact_bracket(g)?;
        let s = contact.z.expect_finite("S on a component")?;
        let phi = hull.min_subgradient(g)?;

        // R = inf{k <= G : D(k) = L(k)} with L the φ-slope line through (G, E^c(G)).
        // D − L is non-negative on (−∞, G] and linear between breakpoints of D.
        let anchor = hull.eval(g);
        let line = |k: &Rational| &anchor + &phi * (k - g);
        let mut candidates: Vec<&Rational> = w.d.breakpoints().filter(|k| *k <= g).collect();
        candidates.push(g);
        let first_zero = candidates.iter().find(|k| w.d.eval(k) == line(k));
        let r = match first_zero {
            Some(k) if **k == *candidates[0] && phi.is_zero() && w.d.left_slope().is_zero() => {
                return Err(Error::Internal(format!("R({u}) is -inf on a bounded component")));
            }
            Some(k) => (*k).clone(),
            None => return Err(Error::Internal(format!("no contact of D with the hull line at u = {u}"))),
        };
        let _ = contact.x.expect_finite("Q on a component")?;
        if r < w.left || s > w.right {
            return Err(Error::Internal(format!(
                "(R, S) = ({r}, {s}) escapes the component [{}, {}]",
                w.left, w.right
            )));
        }
        Ok((r, s, phi))
    }

    /// The hull identities behind the mass and mean balance of the slice at
    /// `u`: `D(R) = L(R)` and `E_u(S) = L(S)` with `L` the `φ`-slope line
    /// through `(G, E_u^c(G))`, on the component containing `G(u)`.
    /// `None` when `u` lies in no component window or `R(u) = G(u)`.
    pub fn hull_identities(&self, u: &Rational) -> Result<Option<bool>> {
        let t = self.triple_at(u)?;
        let Some(w) = self.windows.iter().find(|w| w.u_left < *u && *u < w.u_right) else {
            return Ok(None);
        };
        let (r, s, phi) = (t.r.expect("defined"), t.s.expect("defined"), t.phi.expect("defined"));
        if r == t.g {
            return Ok(None);
        }
        let v = u - &w.u_left;
        let e = put_potential(&w.nu).sub(&put_potential(&w.mu.lift(&v)?));
        let anchor = e.convex_hull()?.eval(&t.g);
        let line = |k: &Rational| &anchor + &phi * (k - &t.g);
        Ok(Some(w.d.eval(&r) == line(&r) && e.eval(&s) == line(&s)))
    }

    /// The target location for the quantile pair `(u, v) ∈ (0, m) × (0, 1)`.
    pub fn sample_y(&self, u: &Rational, v: &Rational) -> Result<Rational> {
        if !v.is_positive() || *v >= Rational::from_integer(1.into()) {
            return Err(Error::Domain(format!("v = {v} outside (0, 1)")));
        }
        let t = self.triple_at(u)?;
        match t.region {
            Region::Supermartingale => t.t.ok_or_else(|| Error::Internal("T undefined".into())),
            Region::Martingale => {
                let (r, s) = (t.r.expect("defined"), t.s.expect("defined"));
                if r == s {
                    return Ok(t.g);
                }
                let threshold = (&s - &t.g) / (&s - &r);
                Ok(if *v <= threshold { r } else { s })
            }
        }
    }

    /// Shadows of shrinking left slices `ε δ_{G(u)}` (the quantile slice
    /// `(u − ε, u]`) in `ν − S^ν(μ_{u−ε})`, for `ε = ε₀/2^j`, `j = 1..=depth`.
    /// Each must be supported in `[R(u), S(u)]` (martingale region) or in the
    /// closed interval from `T(u)` to the next atom of `ν̃` (supermartingale
    /// region), and successive support hulls must be nested.
    ///
    /// `ε₀` is the largest slice on which `G` is constant, further capped in
    /// the supermartingale region so the slice stays above `u*` and within a
    /// single step of the quantile function of `ν̃`.
    pub fn kernel_limit_check(&self, u: &Rational, depth: u32) -> Result<bool> {
        if depth == 0 {
            return Err(Error::Domain("depth must be positive".into()));
        }
        let triple = self.triple_at(u)?;
        let g = triple.g.clone();
        let mut eps0 = u - self.mu.mass_below(&g);
        let (lo, hi) = match triple.region {
            Region::Martingale => (triple.r.clone().expect("defined"), triple.s.clone().expect("defined")),
            Region::Supermartingale => {
                let level = &self.mass - u;
                let right = self.nu_tilde.quantile(&level, QuantileSide::Right)?;
                eps0 = eps0.min(u - &self.u_star).min(self.nu_tilde.cdf(&right) - &level);
                let t = triple.t.clone().expect("defined");
                let next = self
                    .nu_tilde
                    .locations()
                    .find(|y| **y > t)
                    .cloned()
                    .unwrap_or_else(|| t.clone());
                (t, next)
            }
        };
        if !eps0.is_positive() {
            return Err(Error::Internal(format!("empty slice at u = {u}")));
        }
        let mut prev: Option<(Rational, Rational)> = None;
        let mut eps = eps0;
        for _ in 0..depth {
            eps /= Rational::from_integer(2.into());
            let below = self.mu.lift(&(u - &eps))?;
            let remaining = self.nu.sub(&shadow(&below, &self.nu)?.shadow)?;
            let slice = DiscreteMeasure::dirac(g.clone(), eps.clone())?;
            let s = shadow(&slice, &remaining)?.shadow;
            let (Some(a), Some(b)) = (s.min_atom().cloned(), s.max_atom().cloned()) else {
                return Ok(false);
            };
            if a < lo || b > hi {
                return Ok(false);
            }
            if let Some((pa, pb)) = &prev {
                if a < *pa || b > *pb {
                    return Ok(false);
                }
            }
            prev = Some((a, b));
        }
        Ok(true)
    }
}

/// Convenience wrapper: builds the cache and evaluates one level.
pub fn triple_at(mu: &DiscreteMeasure, nu: &DiscreteMeasure, u: &Rational) -> Result<SupportTriple> {
    SupportCurves::new(mu, nu)?.triple_at(u)
}

/// Convenience wrapper around [`SupportCurves::sample_y`].
pub fn sample_y(mu: &DiscreteMeasure, nu: &DiscreteMeasure, u: &Rational, v: &Rational) -> Result<Rational> {
    SupportCurves::new(mu, nu)?.sample_y(u, v)
}

/// Convenience wrapper around [`SupportCurves::kernel_limit_check`].
pub fn kernel_limit_check(mu: &DiscreteMeasure, nu: &DiscreteMeasure, u: &Rational, depth: u32) -> Result<bool> {
    SupportCurves::new(mu, nu)?.kernel_limit_check(u, depth)
}

/// `u ↦ (R, S)` second-order left-monotonicity between two martingale-region triples `a` (at
/// the smaller level) and `b`: `S(a) <= S(b)` and `R(b) ∉ (R(a), S(a))`.
pub fn left_monotone_pair(a: &SupportTriple, b: &SupportTriple) -> bool {
    match (&a.r, &a.s, &b.r, &b.s) {
        (Some(ra), Some(sa), Some(rb), Some(sb)) => sa <= sb && !(ra < rb && rb < sa),
        _ => true,
    }
}

/// Cross-monotonicity between a martingale-region triple `a` and a
/// supermartingale-region triple `b`: `T(b) ∉ (R(a), S(a))`.
pub fn cross_monotone_pair(a: &SupportTriple, b: &SupportTriple) -> bool {
    match (&a.r, &a.s, &b.t) {
        (Some(r), Some(s), Some(t)) => !(r < t && t < s),
        _ => true,
    }
}

impl SupportTriple {
    /// The within-triple inequalities: `R <= G <= S` or `T < G`.
    pub fn is_consistent(&self) -> bool {
        match self.region {
            Region::Martingale => {
                self.t.is_none()
                    && matches!((&self.r, &self.s), (Some(r), Some(s)) if *r <= self.g && self.g <= *s)
            }
            Region::Supermartingale => {
                self.r.is_none() && self.s.is_none() && matches!(&self.t, Some(t) if *t < self.g)
            }
        }
    }

    pub fn as_ext(v: &Option<Rational>) -> Option<Ext> {
        v.clone().map(Ext::Finite)
    }
}
