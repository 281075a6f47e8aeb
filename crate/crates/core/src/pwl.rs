//! Continuous piecewise-linear functions with affine tails.
//!
//! A [`PwlFunction`] is stored as a left tail slope, a strictly increasing list
//! of breakpoints with their values, and a right tail slope. Values are kept in
//! a canonical form: breakpoints at which the slope does not change are pruned,
//! and a globally affine function is stored as a single anchor at `k = 0`.
//! Structural equality is therefore equality of functions.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::num::{Ext, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PwlFunction {
    left_slope: Rational,
    points: Vec<(Rational, Rational)>,
    right_slope: Rational,
}

/// The nearest points left and right of `y` where a function touches its
/// convex hull.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HullContact {
    /// `sup{x <= y : f^c(x) = f(x)}`, `-inf` if empty.
    pub x: Ext,
    /// `inf{z >= y : f^c(z) = f(z)}`, `+inf` if empty.
    pub z: Ext,
}

impl PwlFunction {
    /// Builds a function from its tails and breakpoints. Breakpoints must be
    /// strictly increasing and there must be at least one.
    pub fn new(left_slope: Rational, points: Vec<(Rational, Rational)>, right_slope: Rational) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("a piecewise-linear function needs at least one breakpoint".into()));
        }
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Domain("breakpoints must be strictly increasing".into()));
        }
        Ok(Self::normalized(left_slope, points, right_slope))
    }

    /// `k ↦ slope·k + intercept`.
    pub fn affine(slope: Rational, intercept: Rational) -> Self {
        Self {
            left_slope: slope.clone(),
            points: vec![(Rational::zero(), intercept)],
            right_slope: slope,
        }
    }

    pub fn constant(c: Rational) -> Self {
        Self::affine(Rational::zero(), c)
    }

    fn normalized(left_slope: Rational, points: Vec<(Rational, Rational)>, right_slope: Rational) -> Self {
        let n = points.len();
        let mut kept: Vec<(Rational, Rational)> = Vec::with_capacity(n);
        for i in 0..n {
            let before = if i == 0 {
                left_slope.clone()
            } else {
                slope(&points[i - 1], &points[i])
            };
            let after = if i + 1 == n {
                right_slope.clone()
            } else {
                slope(&points[i], &points[i + 1])
            };
            if before != after {
                kept.push(points[i].clone());
            }
        }
        if kept.is_empty() {
            // Globally affine: re-anchor at the origin.
            let (k0, v0) = &points[0];
            let intercept = v0 - &left_slope * k0;
            return Self::affine(left_slope, intercept);
        }
        Self { left_slope, points: kept, right_slope }
    }

    pub fn left_slope(&self) -> &Rational {
        &self.left_slope
    }

    pub fn right_slope(&self) -> &Rational {
        &self.right_slope
    }

    pub fn points(&self) -> &[(Rational, Rational)] {
        &self.points
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = &Rational> + '_ {
        self.points.iter().map(|(k, _)| k)
    }

    /// True if the function has a single slope everywhere.
    pub fn is_affine(&self) -> bool {
        self.points.len() == 1 && self.left_slope == self.right_slope
    }

    /// Slopes from left to right: the left tail, every inner segment, the right tail.
    pub fn slopes(&self) -> Vec<Rational> {
        let mut s = Vec::with_capacity(self.points.len() + 1);
        s.push(self.left_slope.clone());
        s.extend(self.points.windows(2).map(|w| slope(&w[0], &w[1])));
        s.push(self.right_slope.clone());
        s
    }

    pub fn is_convex(&self) -> bool {
        self.slopes().windows(2).all(|w| w[0] <= w[1])
    }

    /// Intercept of the left tail line: `f(k) = left_slope·k + b` for `k` left of all breakpoints.
    pub fn left_intercept(&self) -> Rational {
        let (k, v) = &self.points[0];
        v - &self.left_slope * k
    }

    /// Intercept of the right tail line.
    pub fn right_intercept(&self) -> Rational {
        let (k, v) = self.points.last().expect("non-empty");
        v - &self.right_slope * k
    }

    pub fn eval(&self, k: &Rational) -> Rational {
        let pts = &self.points;
        let idx = pts.partition_point(|(x, _)| x <= k);
        if idx == 0 {
            let (x0, v0) = &pts[0];
            return v0 + &self.left_slope * (k - x0);
        }
        let (xa, va) = &pts[idx - 1];
        if idx == pts.len() {
            return va + &self.right_slope * (k - xa);
        }
        let s = slope(&pts[idx - 1], &pts[idx]);
        va + s * (k - xa)
    }

    /// `a·f + b·g`.
    pub fn linear_combine(f: &Self, g: &Self, a: &Rational, b: &Rational) -> Self {
        let mut ks: Vec<Rational> = f.breakpoints().chain(g.breakpoints()).cloned().collect();
        ks.sort();
        ks.dedup();
        let points = ks
            .into_iter()
            .map(|k| {
                let v = a * f.eval(&k) + b * g.eval(&k);
                (k, v)
            })
            .collect();
        Self::normalized(
            a * &f.left_slope + b * &g.left_slope,
            points,
            a * &f.right_slope + b * &g.right_slope,
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let one = Rational::from_integer(1.into());
        Self::linear_combine(self, other, &one, &one)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let one = Rational::from_integer(1.into());
        Self::linear_combine(self, other, &one, &-one.clone())
    }

    /// `k ↦ f(k) + slope·k + intercept`.
    pub fn add_affine(&self, slope: &Rational, intercept: &Rational) -> Self {
        Self::linear_combine(self, &Self::affine(slope.clone(), intercept.clone()), &Rational::from_integer(1.into()), &Rational::from_integer(1.into()))
    }

    /// The largest convex minorant `f^c`.
    ///
    /// The tails of `f^c` carry the tail slopes of `f`, with intercepts
    /// `min_k (f(k) − slope·k)` taken over the breakpoints; between the two
    /// tail contact points the hull is the lower envelope of the breakpoints.
    ///
    /// When the left tail slope exceeds the right one no convex minorant
    /// exists (the envelope is identically `−∞`) and an error is returned.
    pub fn convex_hull(&self) -> Result<Self> {
        let (sl, sr) = (&self.left_slope, &self.right_slope);
        if sl > sr {
            return Err(Error::Domain(format!(
                "convex minorant is -inf: left tail slope {sl} exceeds right tail slope {sr}"
            )));
        }
        let pts = &self.points;
        let offset = |s: &Rational, i: usize| &pts[i].1 - s * &pts[i].0;

        // Rightmost breakpoint minimizing f - sl·k and leftmost minimizing f - sr·k.
        let mut a_l = 0;
        let mut b_l = offset(sl, 0);
        for i in 1..pts.len() {
            let b = offset(sl, i);
            if b <= b_l {
                b_l = b;
                a_l = i;
            }
        }
        if sl == sr {
            return Ok(Self::affine(sl.clone(), b_l));
        }
        let mut a_r = 0;
        let mut b_r = offset(sr, 0);
        for i in 1..pts.len() {
            let b = offset(sr, i);
            if b < b_r {
                b_r = b;
                a_r = i;
            }
        }
        if a_l > a_r {
            return Err(Error::Internal(format!(
                "hull tail contacts out of order ({a_l} > {a_r})"
            )));
        }

        // Monotone-chain lower envelope of pts[a_l..=a_r].
        let mut chain: Vec<(Rational, Rational)> = Vec::new();
        for p in &pts[a_l..=a_r] {
            while chain.len() >= 2 {
                let o = &chain[chain.len() - 2];
                let a = &chain[chain.len() - 1];
                // Drop `a` unless it lies strictly below the segment o -> p.
                if slope(o, a) >= slope(a, p) {
                    chain.pop();
                } else {
                    break;
                }
            }
            chain.push(p.clone());
        }
        Ok(Self::normalized(sl.clone(), chain, sr.clone()))
    }

    /// `(X^f(y), Z^f(y))`: the nearest contact points of `f` with `f^c` on
    /// each side of `y`.
    pub fn contact_bracket(&self, y: &Rational) -> Result<HullContact> {
        let hull = self.convex_hull()?;
        let gap = self.sub(&hull);
        if gap.eval(y).is_zero() {
            return Ok(HullContact { x: Ext::Finite(y.clone()), z: Ext::Finite(y.clone()) });
        }
        // `gap` is non-negative and constant on both tails, so away from `y`
        // its zero set is bounded by its own breakpoints.
        let x = gap
            .points
            .iter()
            .rev()
            .find(|(k, v)| k <= y && v.is_zero())
            .map(|(k, _)| k.clone())
            .map_or(Ext::NegInf, Ext::Finite);
        let z = gap
            .points
            .iter()
            .find(|(k, v)| k >= y && v.is_zero())
            .map_or(Ext::PosInf, |(k, _)| Ext::Finite(k.clone()));
        Ok(HullContact { x, z })
    }

    /// Left derivative of a convex function at `y`, i.e. the smallest element
    /// of its subdifferential.
    pub fn min_subgradient(&self, y: &Rational) -> Result<Rational> {
        if !self.is_convex() {
            return Err(Error::Contract("min_subgradient requires a convex function".into()));
        }
        let idx = self.points.partition_point(|(k, _)| k < y);
        Ok(self.slopes()[idx].clone())
    }

    /// The measure whose put potential is this function (its second
    /// distributional derivative).
    pub fn measure_of(&self) -> Result<DiscreteMeasure> {
        if !self.is_convex() {
            return Err(Error::NotAPotential("function is not convex".into()));
        }
        if !self.left_slope.is_zero() {
            return Err(Error::NotAPotential(format!("left tail slope is {}, not 0", self.left_slope)));
        }
        if !self.left_intercept().is_zero() {
            return Err(Error::NotAPotential(format!(
                "left tail value is {}, not 0",
                self.left_intercept()
            )));
        }
        if self.is_affine() {
            return Ok(DiscreteMeasure::zero());
        }
        let s = self.slopes();
        DiscreteMeasure::new(
            self.points
                .iter()
                .enumerate()
                .map(|(i, (k, _))| (k.clone(), &s[i + 1] - &s[i])),
        )
    }

    /// `sup_k (f(k) − g(k))`, or `+inf` when a tail diverges upward.
    pub fn sup_difference(f: &Self, g: &Self) -> Ext {
        let h = f.sub(g);
        if h.left_slope.is_negative() || h.right_slope.is_positive() {
            return Ext::PosInf;
        }
        let best = h.points.iter().map(|(_, v)| v).max().expect("non-empty").clone();
        Ext::Finite(best)
    }

    /// A breakpoint at which `sup_difference` is attained, if it is finite.
    pub fn argmax_difference(f: &Self, g: &Self) -> Option<Rational> {
        let h = f.sub(g);
        if h.left_slope.is_negative() || h.right_slope.is_positive() {
            return None;
        }
        h.points.iter().max_by(|a, b| a.1.cmp(&b.1)).map(|(k, _)| k.clone())
    }
}

fn slope(a: &(Rational, Rational), b: &(Rational, Rational)) -> Rational {
    (&b.1 - &a.1) / (&b.0 - &a.0)
}

/// `P_η(k) = ∫ (k − x)⁺ η(dx)`.
pub fn put_potential(m: &DiscreteMeasure) -> PwlFunction {
    if m.is_zero() {
        return PwlFunction::constant(Rational::zero());
    }
    let mut points = Vec::with_capacity(m.len());
    let mut mass_below = Rational::zero();
    let mut value = Rational::zero();
    let mut prev: Option<&Rational> = None;
    for (x, w) in m.atoms() {
        if let Some(p) = prev {
            value += &mass_below * (x - p);
        }
        points.push((x.clone(), value.clone()));
        mass_below += w;
        prev = Some(x);
    }
    PwlFunction::normalized(Rational::zero(), points, mass_below)
}

/// `C_η(k) = ∫ (x − k)⁺ η(dx)`.
pub fn call_potential(m: &DiscreteMeasure) -> PwlFunction {
    if m.is_zero() {
        return PwlFunction::constant(Rational::zero());
    }
    let mut points: Vec<(Rational, Rational)> = Vec::with_capacity(m.len());
    let mut mass_above = Rational::zero();
    let mut value = Rational::zero();
    let mut prev: Option<&Rational> = None;
    for (x, w) in m.atoms().iter().rev() {
        if let Some(p) = prev {
            value += &mass_above * (p - x);
        }
        points.push((x.clone(), value.clone()));
        mass_above += w;
        prev = Some(x);
    }
    points.reverse();
    PwlFunction::normalized(-mass_above, points, Rational::zero())
}

impl fmt::Display for PwlFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[slope {}] ", self.left_slope)?;
        for (k, v) in &self.points {
            write!(f, "({k}, {v}) ")?;
        }
        write!(f, "[slope {}]", self.right_slope)
    }
}
