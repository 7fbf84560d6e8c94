//! Scalar tower (binary64, exact rationals, parameter gradients, Taylor jets),
//! jet composition and the Faà di Bruno oracle.

mod bruno;
mod grad;
mod jet;
mod linalg;
mod scalar;

pub use bruno::{bruno_compose, bruno_partitions, BrunoTerm};
pub use grad::Grad;
pub use jet::{Jet, JetOp, LiftKind};
pub use linalg::{max_abs, Determinant};
pub use scalar::{
    factorial, pow_int, rational_from_f64, rational_from_i64, rational_to_f64, Rational, Scalar,
};

/// Default floor under which a divisor (or `cos` for `tan`) counts as zero.
pub const DEFAULT_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum NumericError {
    #[error("division by near-zero value {value:e}")]
    DivisionByNearZero { value: f64 },
    #[error("tan pole at {arg}: cos is below the floor")]
    TanPole { arg: f64 },
    #[error("{op} is not available for exact rational scalars")]
    UnsupportedInRationalMode { op: &'static str },
    #[error("jet order mismatch ({left} vs {right})")]
    OrderMismatch { left: usize, right: usize },
    #[error("operation expects {expected} operands, got {found}")]
    Arity { expected: usize, found: usize },
    #[error("outer jet expanded at {expected} but inner jet starts at {found}")]
    ExpansionPointMismatch { expected: f64, found: f64 },
    #[error("derivatives up to order {needed} required, only {available} available")]
    InsufficientOrder { needed: usize, available: usize },
    #[error("parameter l{index} is not bound (have {available})")]
    MissingParameter { index: usize, available: usize },
}
