use thiserror::Error;

use crate::order::{OrderKind, Witness};

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument lies outside the operation's domain (quantile level out of range, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A required stochastic order between two measures does not hold. The
    /// witness is boxed to keep `Result`s small on the happy path.
    #[error("order violation: {kind:?} fails ({witness})")]
    Order { kind: OrderKind, witness: Box<Witness> },

    /// A function handed to a routine that expects a potential is not one.
    #[error("not a potential function: {0}")]
    NotAPotential(String),

    /// A caller-certified precondition (e.g. convexity) is violated.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// A problem instance exceeds the size a brute-force routine accepts.
    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("missing cost entry: {0}")]
    MissingCost(String),

    /// An exactly-checked postcondition failed. Always a bug.
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
