//! Exact computation of shadow measures, the regime-switching level `u*`, the
//! supporting functions `(R, S, T)` and the increasing supermartingale
//! coupling between finitely supported measures on the real line.
//!
//! Every quantity is an exact rational; there is no floating point anywhere in
//! the crate. The modules build on each other bottom-up:
//!
//! * [`measure`] — discrete measures, quantiles and the quantile lift `μ_u`;
//! * [`pwl`] — piecewise-linear functions: potentials, convex hulls, contacts;
//! * [`order`] — the stochastic orders and the maximal element `T^ν(μ)`;
//! * [`shadow`] — the shadow `S^ν(μ)` via the potential formula;
//! * [`regime`] — the excess curve `c(u)`, `u*` and irreducible decompositions;
//! * [`coupling`] — the increasing coupling, reference couplings, verification;
//! * [`curves`] — pointwise `(R, S, T, φ)` and the two-variable sampler;
//! * [`oracle`] — an exact simplex solver and independent certification LPs;
//! * [`gen`] — seeded random instance generators for tests and the CLI.

pub mod coupling;
pub mod curves;
pub mod error;
pub mod gen;
pub mod measure;
pub mod num;
pub mod oracle;
pub mod order;
pub mod pwl;
pub mod regime;
pub mod shadow;

pub use error::{Error, Result};
pub use measure::{DiscreteMeasure, QuantileSide};
pub use num::{Ext, Rational};
pub use order::OrderKind;
pub use pwl::PwlFunction;
