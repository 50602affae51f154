use thiserror::Error;

use crate::mukai::MukaiVector;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("H4 component {ch2} + {r} is not an integer")]
    NonIntegralH4 { ch2: String, r: i64 },
    #[error("ch2 = {0} is not a half-integer")]
    Granularity(String),
    #[error("{0} is not spherical: (s, s) = {1}")]
    NotSpherical(MukaiVector, i64),
    #[error("the zero vector has no primitivity")]
    ZeroVector,
    #[error("t must be positive, got {0}")]
    OutsideSlice(String),
    #[error("central charge of {0} vanishes at the given point")]
    VanishingCharge(MukaiVector),
    #[error("vertical wall has no discriminant")]
    NoDiscriminant,
    #[error("nesting is only defined for semicircles")]
    NestingUndefined,
    #[error("classes {0} and {1} are linearly dependent")]
    Dependent(MukaiVector, MukaiVector),
    #[error("span is not hyperbolic: Gram determinant {0} >= 0")]
    NotHyperbolic(i64),
    #[error("{0} does not lie in the lattice")]
    NotInLattice(MukaiVector),
    #[error("reflection sequence did not terminate after {cap} steps: {trace:?}")]
    IterationCap { cap: usize, trace: Vec<MukaiVector> },
    #[error("orthogonality violated: a + b - 2 = {lhs} but -(r + s)(p + q) = {rhs}")]
    Orthogonality { lhs: i64, rhs: i64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("hypotheses of the wall-crossing rule unmet: {0}")]
    HypothesesUnmet(String),
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
    #[error("{0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
}
