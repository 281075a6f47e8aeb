//! Seeded generators of small random instances for property tests, the
//! acceptance harness and the command-line tool.
//!
//! Targets `ν` have 2–7 integer atoms in `[−6, 6]` with weights in `1/12`
//! steps; sources `μ` have at most five atoms and are built from `ν` so that
//! the required order holds by construction (the generator never needs to
//! reject).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::measure::DiscreteMeasure;
use crate::num::{int, rat, Rational};
use crate::pwl::PwlFunction;

/// Weight denominator of generated measures.
pub const DENOMINATOR: i64 = 12;
/// Maximal number of atoms of a generated source measure.
pub const MAX_SOURCE_ATOMS: usize = 5;
/// Maximal number of atoms of a generated target measure.
pub const MAX_TARGET_ATOMS: usize = 7;

#[derive(Clone, Debug)]
pub struct InstanceGenerator {
    rng: ChaCha8Rng,
}

impl InstanceGenerator {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// A random composition of `total` into `parts` positive integers.
    fn composition(&mut self, total: i64, parts: usize) -> Vec<i64> {
        let mut cuts: Vec<i64> = (1..total).collect();
        cuts.shuffle(&mut self.rng);
        let mut cuts: Vec<i64> = cuts.into_iter().take(parts - 1).collect();
        cuts.sort_unstable();
        let mut out = Vec::with_capacity(parts);
        let mut prev = 0;
        for c in cuts.into_iter().chain(std::iter::once(total)) {
            out.push(c - prev);
            prev = c;
        }
        out
    }

    /// `ν`: distinct integer atoms in `[−6, 6]`, probability weights in `1/12` steps.
    pub fn target(&mut self) -> DiscreteMeasure {
        let n = self.rng.gen_range(2..=MAX_TARGET_ATOMS);
        let mut xs: Vec<i64> = (-6..=6).collect();
        xs.shuffle(&mut self.rng);
        let weights = self.composition(DENOMINATOR, n);
        DiscreteMeasure::new(xs.into_iter().zip(weights).map(|(x, w)| (int(x), rat(w, DENOMINATOR))))
            .expect("positive weights")
    }

    /// Merges the atoms of `ν` into at most five groups and replaces each group
    /// by its barycenter, so the result precedes `ν` in convex order.
    fn contraction(&mut self, nu: &DiscreteMeasure) -> DiscreteMeasure {
        let groups = self.rng.gen_range(1..=nu.len().min(MAX_SOURCE_ATOMS));
        let mut label: Vec<usize> = (0..nu.len()).map(|i| if i < groups { i } else { self.rng.gen_range(0..groups) }).collect();
        label.shuffle(&mut self.rng);
        let mut mass = vec![Rational::from_integer(0.into()); groups];
        let mut moment = mass.clone();
        for ((x, w), g) in nu.atoms().iter().zip(label) {
            mass[g] += w;
            moment[g] += x * w;
        }
        DiscreteMeasure::new(mass.into_iter().zip(moment).map(|(m, s)| (&s / &m, m))).expect("positive weights")
    }

    /// `μ ≤_c ν` (equal means).
    pub fn convex_instance(&mut self) -> (DiscreteMeasure, DiscreteMeasure) {
        let nu = self.target();
        (self.contraction(&nu), nu)
    }

    /// `μ ≤_cd ν`: a convex-order source whose atoms are moved right by 0–2.
    pub fn cd_instance(&mut self) -> (DiscreteMeasure, DiscreteMeasure) {
        let (mu, nu) = self.convex_instance();
        let shifted: Vec<(Rational, Rational)> =
            mu.atoms().iter().map(|(x, w)| (x + int(self.rng.gen_range(0..=2)), w.clone())).collect();
        (DiscreteMeasure::new(shifted).expect("positive weights"), nu)
    }

    /// `μ ≤_cd ν` with every atom of `μ` strictly to the right of `ν`.
    pub fn separated_instance(&mut self) -> (DiscreteMeasure, DiscreteMeasure) {
        let nu = self.target();
        let top = nu.max_atom().expect("non-empty").clone();
        let n = self.rng.gen_range(1..=MAX_SOURCE_ATOMS);
        let mut offsets: Vec<i64> = (1..=6).collect();
        offsets.shuffle(&mut self.rng);
        let weights = self.composition(DENOMINATOR, n);
        let mu = DiscreteMeasure::new(
            offsets.into_iter().zip(weights).map(|(d, w)| (&top + int(d), rat(w, DENOMINATOR))),
        )
        .expect("positive weights");
        (mu, nu)
    }

    /// A non-zero `ξ ≤ m` whose weights stay on the `1/12` lattice when `m`'s do.
    pub fn sub_measure(&mut self, m: &DiscreteMeasure) -> DiscreteMeasure {
        loop {
            let atoms: Vec<(Rational, Rational)> = m
                .atoms()
                .iter()
                .map(|(x, w)| {
                    let steps = (w * int(DENOMINATOR)).floor().to_integer();
                    let keep = if steps > 0.into() {
                        let k = self.rng.gen_range(0..=steps.try_into().unwrap_or(DENOMINATOR));
                        rat(k, DENOMINATOR)
                    } else if self.rng.gen_bool(0.5) {
                        w.clone()
                    } else {
                        int(0)
                    };
                    (x.clone(), keep)
                })
                .collect();
            let xi = DiscreteMeasure::new(atoms).expect("non-negative weights");
            if !xi.is_zero() {
                return xi;
            }
        }
    }

    /// Splits `m = m₁ + m₂` atom by atom with random proportions.
    pub fn split(&mut self, m: &DiscreteMeasure) -> (DiscreteMeasure, DiscreteMeasure) {
        const FRACTIONS: [(i64, i64); 7] = [(0, 1), (1, 4), (1, 3), (1, 2), (2, 3), (3, 4), (1, 1)];
        let first: Vec<(Rational, Rational)> = m
            .atoms()
            .iter()
            .map(|(x, w)| {
                let (p, q) = *FRACTIONS.choose(&mut self.rng).expect("non-empty");
                (x.clone(), w * rat(p, q))
            })
            .collect();
        let first = DiscreteMeasure::new(first).expect("non-negative weights");
        let second = m.sub(&first).expect("first part is dominated");
        (first, second)
    }

    /// `μ ≤_pcd ν` with `mass(μ) < mass(ν)` in general: a sub-measure of a
    /// convex-decreasing source.
    pub fn pcd_instance(&mut self) -> (DiscreteMeasure, DiscreteMeasure) {
        let (mu, nu) = self.cd_instance();
        (self.sub_measure(&mu), nu)
    }

    /// A random piecewise-linear function with integer breakpoints in
    /// `[−8, 8]`, integer values in `[−10, 10]` and tail slopes `sL <= sR`.
    pub fn pwl(&mut self) -> PwlFunction {
        let n = self.rng.gen_range(1..=6);
        let mut ks: Vec<i64> = (-8..=8).collect();
        ks.shuffle(&mut self.rng);
        let mut ks: Vec<i64> = ks.into_iter().take(n).collect();
        ks.sort_unstable();
        let points = ks.into_iter().map(|k| (int(k), int(self.rng.gen_range(-10..=10)))).collect();
        let a = self.rng.gen_range(-3..=3);
        let b = self.rng.gen_range(-3..=3);
        PwlFunction::new(int(a.min(b)), points, int(a.max(b))).expect("sorted breakpoints")
    }

    /// A random convex piecewise-linear function with integer slopes.
    pub fn convex_pwl(&mut self) -> PwlFunction {
        let n = self.rng.gen_range(1..=5);
        let mut ks: Vec<i64> = (-8..=8).collect();
        ks.shuffle(&mut self.rng);
        let mut ks: Vec<i64> = ks.into_iter().take(n).collect();
        ks.sort_unstable();
        let mut slopes: Vec<i64> = (0..=n).map(|_| self.rng.gen_range(-4..=4)).collect();
        slopes.sort_unstable();
        let mut value = int(self.rng.gen_range(-10..=10));
        let mut points = Vec::with_capacity(n);
        for (i, k) in ks.iter().enumerate() {
            if i > 0 {
                value += int(slopes[i]) * int(k - ks[i - 1]);
            }
            points.push((int(*k), value.clone()));
        }
        PwlFunction::new(int(slopes[0]), points, int(slopes[n])).expect("sorted breakpoints")
    }
}
