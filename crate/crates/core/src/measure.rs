//! Finitely supported measures on the real line.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::num::{Ext, Rational};
use crate::order::{OrderKind, Witness};

/// A finite nonnegative measure `Σ w_i δ_{x_i}` with strictly increasing
/// locations and strictly positive weights. The empty atom list is the zero
/// measure.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct DiscreteMeasure {
    atoms: Vec<(Rational, Rational)>,
}

/// Which generalized inverse of the CDF to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuantileSide {
    /// `G⁻(u) = sup{k : F(k) < u}`, left-continuous.
    Left,
    /// `G⁺(u) = inf{k : F(k) > u}`, right-continuous.
    Right,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Moments {
    pub mass: Rational,
    pub mean: Rational,
    /// Smallest atom; `+inf` for the zero measure (infimum of the empty set).
    pub support_min: Ext,
    /// Largest atom; `-inf` for the zero measure.
    pub support_max: Ext,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Combine {
    Add,
    Sub,
}

impl DiscreteMeasure {
    pub fn zero() -> Self {
        Self { atoms: Vec::new() }
    }

    /// `w δ_x`; a zero weight gives the zero measure.
    pub fn dirac(x: Rational, w: Rational) -> Result<Self> {
        Self::new([(x, w)])
    }

    /// Builds a measure from `(location, weight)` pairs in any order.
    /// Equal locations are merged and zero weights dropped; negative weights
    /// are rejected.
    pub fn new<I>(atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Rational, Rational)>,
    {
        let mut v: Vec<(Rational, Rational)> = atoms.into_iter().collect();
        if let Some((x, w)) = v.iter().find(|(_, w)| w.is_negative()) {
            return Err(Error::Domain(format!("negative weight {w} at {x}")));
        }
        v.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(Self::from_sorted_unchecked(v))
    }

    /// Merges runs of equal locations and drops zero weights. The input must be
    /// sorted by location with nonnegative weights.
    fn from_sorted_unchecked(v: Vec<(Rational, Rational)>) -> Self {
        let mut atoms: Vec<(Rational, Rational)> = Vec::with_capacity(v.len());
        for (x, w) in v {
            match atoms.last_mut() {
                Some((lx, lw)) if *lx == x => *lw += w,
                _ => atoms.push((x, w)),
            }
        }
        atoms.retain(|(_, w)| !w.is_zero());
        Self { atoms }
    }

    pub fn atoms(&self) -> &[(Rational, Rational)] {
        &self.atoms
    }

    pub fn locations(&self) -> impl Iterator<Item = &Rational> + '_ {
        self.atoms.iter().map(|(x, _)| x)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mass(&self) -> Rational {
        self.atoms.iter().map(|(_, w)| w).sum()
    }

    /// First moment `Σ w_i x_i` (not normalized by the mass).
    pub fn mean(&self) -> Rational {
        self.atoms.iter().map(|(x, w)| x * w).sum()
    }

    pub fn moments(&self) -> Moments {
        Moments {
            mass: self.mass(),
            mean: self.mean(),
            support_min: self.atoms.first().map_or(Ext::PosInf, |(x, _)| Ext::Finite(x.clone())),
            support_max: self.atoms.last().map_or(Ext::NegInf, |(x, _)| Ext::Finite(x.clone())),
        }
    }

    pub fn min_atom(&self) -> Option<&Rational> {
        self.atoms.first().map(|(x, _)| x)
    }

    pub fn max_atom(&self) -> Option<&Rational> {
        self.atoms.last().map(|(x, _)| x)
    }

    /// `η({x})`.
    pub fn weight_at(&self, x: &Rational) -> Rational {
        match self.atoms.binary_search_by(|(y, _)| y.cmp(x)) {
            Ok(i) => self.atoms[i].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    /// Right-continuous CDF `F(k) = η((-inf, k])`.
    pub fn cdf(&self, k: &Rational) -> Rational {
        self.atoms.iter().take_while(|(x, _)| x <= k).map(|(_, w)| w).sum()
    }

    /// `η((-inf, k))`.
    pub fn mass_below(&self, k: &Rational) -> Rational {
        self.atoms.iter().take_while(|(x, _)| x < k).map(|(_, w)| w).sum()
    }

    /// Generalized inverse of the CDF.
    ///
    /// The left version accepts `0 < u <= mass` (at `u = mass` it returns the
    /// largest atom); the right version accepts `0 <= u < mass`.
    pub fn quantile(&self, u: &Rational, side: QuantileSide) -> Result<Rational> {
        let mass = self.mass();
        let in_range = match side {
            QuantileSide::Left => u.is_positive() && *u <= mass,
            QuantileSide::Right => !u.is_negative() && *u < mass,
        };
        if !in_range {
            return Err(Error::Domain(format!(
                "quantile level {u} outside the admissible range for mass {mass} ({side:?})"
            )));
        }
        let mut cum = Rational::zero();
        for (x, w) in &self.atoms {
            cum += w;
            let hit = match side {
                QuantileSide::Left => cum >= *u,
                QuantileSide::Right => cum > *u,
            };
            if hit {
                return Ok(x.clone());
            }
        }
        Err(Error::Internal("quantile scan fell off the support".into()))
    }

    /// The quantile lift `μ_u = μ|_{(-inf, G(u))} + (u - μ((-inf, G(u))))δ_{G(u)}`
    /// with `G` the left-continuous quantile. Has mass exactly `u`.
    pub fn lift(&self, u: &Rational) -> Result<Self> {
        let mass = self.mass();
        if u.is_negative() || *u > mass {
            return Err(Error::Domain(format!("lift level {u} outside [0, {mass}]")));
        }
        if u.is_zero() {
            return Ok(Self::zero());
        }
        let g = self.quantile(u, QuantileSide::Left)?;
        let mut atoms: Vec<(Rational, Rational)> =
            self.atoms.iter().take_while(|(x, _)| *x < g).cloned().collect();
        let below: Rational = atoms.iter().map(|(_, w)| w).sum();
        atoms.push((g, u - below));
        Ok(Self::from_sorted_unchecked(atoms))
    }

    /// Exact atom-wise sum or difference. `Sub` requires `other <= self`
    /// atom-wise and otherwise reports the first offending atom.
    pub fn combine(&self, other: &Self, op: Combine) -> Result<Self> {
        let mut out = Vec::with_capacity(self.atoms.len() + other.atoms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.atoms, &other.atoms);
        while i < a.len() || j < b.len() {
            let ord = match (a.get(i), b.get(j)) {
                (Some(p), Some(q)) => p.0.cmp(&q.0),
                (Some(_), None) => std::cmp::Ordering::Less,
                (None, _) => std::cmp::Ordering::Greater,
            };
            let (x, wa, wb) = match ord {
                std::cmp::Ordering::Less => {
                    i += 1;
                    (a[i - 1].0.clone(), a[i - 1].1.clone(), Rational::zero())
                }
                std::cmp::Ordering::Greater => {
                    j += 1;
                    (b[j - 1].0.clone(), Rational::zero(), b[j - 1].1.clone())
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                    (a[i - 1].0.clone(), a[i - 1].1.clone(), b[j - 1].1.clone())
                }
            };
            let w = match op {
                Combine::Add => wa + wb,
                Combine::Sub => {
                    if wb > wa {
                        return Err(Error::Order {
                            kind: OrderKind::Pointwise,
                            witness: Box::new(Witness::AtomExcess { x, lhs: wb, rhs: wa }),
                        });
                    }
                    wa - wb
                }
            };
            out.push((x, w));
        }
        Ok(Self::from_sorted_unchecked(out))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, Combine::Add).expect("addition of measures cannot fail")
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, Combine::Sub)
    }

    /// `c · η` for `c >= 0`.
    pub fn scale(&self, c: &Rational) -> Result<Self> {
        if c.is_negative() {
            return Err(Error::Domain(format!("negative scale factor {c}")));
        }
        Ok(Self::from_sorted_unchecked(
            self.atoms.iter().map(|(x, w)| (x.clone(), w * c)).collect(),
        ))
    }

    /// Restriction to the set `{x : keep(x)}`.
    pub fn restrict<F: Fn(&Rational) -> bool>(&self, keep: F) -> Self {
        Self {
            atoms: self.atoms.iter().filter(|(x, _)| keep(x)).cloned().collect(),
        }
    }

    /// Atom-wise domination `self <= other`.
    pub fn dominated_by(&self, other: &Self) -> bool {
        self.atoms.iter().all(|(x, w)| *w <= other.weight_at(x))
    }

    /// Quantile slices `lift(j·m/parts) - lift((j-1)·m/parts)` for `j = 1..=parts`.
    pub fn refine(&self, parts: usize) -> Result<Vec<Self>> {
        if parts == 0 {
            return Err(Error::Domain("refine needs at least one part".into()));
        }
        let step = self.mass() / Rational::from_integer(parts.into());
        let mut out = Vec::with_capacity(parts);
        let mut prev = Self::zero();
        for j in 1..=parts {
            let next = if j == parts {
                self.clone()
            } else {
                self.lift(&(&step * Rational::from_integer(j.into())))?
            };
            out.push(next.sub(&prev)?);
            prev = next;
        }
        Ok(out)
    }
}

impl fmt::Display for DiscreteMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return f.write_str("0");
        }
        for (i, (x, w)) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{w}·δ({x})")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat};

    fn m(atoms: &[(i64, i64, i64)]) -> DiscreteMeasure {
        DiscreteMeasure::new(atoms.iter().map(|&(x, p, q)| (int(x), rat(p, q)))).unwrap()
    }

    #[test]
    fn moments_examples() {
        let mo = m(&[(-2, 1, 2), (1, 1, 2)]).moments();
        assert_eq!((mo.mass, mo.mean), (int(1), rat(-1, 2)));
        assert_eq!(mo.support_min, Ext::Finite(int(-2)));
        assert_eq!(mo.support_max, Ext::Finite(int(1)));

        let z = DiscreteMeasure::zero().moments();
        assert_eq!((z.mass, z.mean), (int(0), int(0)));
        assert_eq!((z.support_min, z.support_max), (Ext::PosInf, Ext::NegInf));

        let eg3 = m(&[(-2, 1, 3), (0, 1, 3), (2, 1, 3)]).moments();
        assert_eq!((eg3.mass, eg3.mean), (int(1), int(0)));
        assert_eq!(eg3.support_min, Ext::Finite(int(-2)));
        assert_eq!(eg3.support_max, Ext::Finite(int(2)));
    }

    #[test]
    fn construction_merges_and_validates() {
        let a = DiscreteMeasure::new([(int(1), rat(1, 4)), (int(0), rat(1, 2)), (int(1), rat(1, 4))]).unwrap();
        assert_eq!(a, m(&[(0, 1, 2), (1, 1, 2)]));
        assert!(DiscreteMeasure::new([(int(0), rat(-1, 2))]).is_err());
        assert!(DiscreteMeasure::new([(int(0), int(0))]).unwrap().is_zero());
    }

    #[test]
    fn quantile_examples() {
        let d0 = m(&[(0, 1, 1)]);
        assert_eq!(d0.quantile(&rat(1, 2), QuantileSide::Left).unwrap(), int(0));
        let two = m(&[(-2, 1, 2), (1, 1, 2)]);
        assert_eq!(two.quantile(&rat(1, 2), QuantileSide::Left).unwrap(), int(-2));
        assert_eq!(two.quantile(&rat(1, 2), QuantileSide::Right).unwrap(), int(1));
        let sym = m(&[(-1, 1, 2), (1, 1, 2)]);
        assert_eq!(sym.quantile(&rat(3, 4), QuantileSide::Left).unwrap(), int(1));
    }

    #[test]
    fn quantile_domain_errors() {
        let two = m(&[(-2, 1, 2), (1, 1, 2)]);
        assert!(two.quantile(&int(0), QuantileSide::Left).is_err());
        assert!(two.quantile(&int(1), QuantileSide::Right).is_err());
        assert!(two.quantile(&rat(3, 2), QuantileSide::Left).is_err());
        assert!(two.quantile(&rat(-1, 2), QuantileSide::Right).is_err());
        assert!(two.quantile(&int(0), QuantileSide::Right).is_ok());
    }

    #[test]
    fn lift_examples() {
        assert_eq!(m(&[(0, 1, 1)]).lift(&rat(3, 4)).unwrap(), m(&[(0, 3, 4)]));
        let sym = m(&[(-1, 1, 2), (1, 1, 2)]);
        assert_eq!(sym.lift(&rat(1, 2)).unwrap(), m(&[(-1, 1, 2)]));
        assert_eq!(sym.lift(&rat(3, 4)).unwrap(), m(&[(-1, 1, 2), (1, 1, 4)]));
        assert!(sym.lift(&int(0)).unwrap().is_zero());
        assert_eq!(sym.lift(&int(1)).unwrap(), sym);
        assert!(sym.lift(&rat(5, 4)).is_err());
        assert!(sym.lift(&rat(-1, 4)).is_err());
    }

    #[test]
    fn combine_examples() {
        assert_eq!(m(&[(0, 1, 2)]).add(&m(&[(0, 1, 2)])), m(&[(0, 1, 1)]));
        let nu = m(&[(-2, 1, 2), (1, 1, 2)]);
        assert_eq!(nu.sub(&m(&[(-2, 1, 2)])).unwrap(), m(&[(1, 1, 2)]));
        match m(&[(0, 1, 2)]).sub(&m(&[(1, 1, 1)])) {
            Err(Error::Order { kind: OrderKind::Pointwise, witness }) => match *witness {
                Witness::AtomExcess { x, .. } => assert_eq!(x, int(1)),
                other => panic!("expected an atom violation, got {other:?}"),
            },
            other => panic!("expected an atom violation, got {other:?}"),
        }
    }

    #[test]
    fn refine_examples() {
        let d0 = m(&[(0, 1, 1)]);
        assert_eq!(d0.refine(2).unwrap(), vec![m(&[(0, 1, 2)]), m(&[(0, 1, 2)])]);
        let sym = m(&[(-1, 1, 2), (1, 1, 2)]);
        assert_eq!(sym.refine(2).unwrap(), vec![m(&[(-1, 1, 2)]), m(&[(1, 1, 2)])]);
        assert_eq!(sym.refine(1).unwrap(), vec![sym.clone()]);
        assert!(sym.refine(0).is_err());
    }

    #[test]
    fn cdf_and_mass_below() {
        let two = m(&[(-2, 1, 2), (1, 1, 2)]);
        assert_eq!(two.cdf(&int(-2)), rat(1, 2));
        assert_eq!(two.mass_below(&int(-2)), int(0));
        assert_eq!(two.cdf(&int(5)), int(1));
    }
}
