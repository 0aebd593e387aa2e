//! Automatic differentiation.
//!
//! Two layers cooperate:
//!
//! * [`Jet`] carries truncated Taylor coefficients (value plus up to the third
//!   derivative) with respect to one active input coordinate. It is generic over
//!   the coefficient type so the coefficients can themselves be recorded.
//! * [`Tape`] records scalar operations and replays them backwards to get the
//!   gradient of a scalar loss with respect to any recorded variable.
//!
//! Running a network on `Jet<Var>` gives input derivatives whose parameter
//! gradients come out of a single reverse sweep.

mod jet;
mod scalar;
mod tape;

pub use jet::{Elementary, Jet, MAX_ORDER};
pub use scalar::Scalar;
pub use tape::{param_gradient, Adjoints, Op, Tape, Var};

use core::fmt;

/// Failures raised by the differentiation layer.
#[derive(Debug, Clone, PartialEq)]
pub enum AdError {
    /// Requested derivative order exceeds [`MAX_ORDER`].
    OrderTooHigh { requested: usize },
    /// Division by a jet whose value is exactly zero.
    DivisionByZero,
    /// Jets of different orders were combined by an n-ary primitive.
    OrderMismatch { left: usize, right: usize },
    /// Wrong number of arguments for an elementary operation.
    Arity { expected: usize, got: usize },
    /// A non-finite number appeared during the reverse sweep.
    NonFinite { node: usize, op: Op },
    /// Variable belongs to a different tape.
    ForeignVariable,
}

impl fmt::Display for AdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdError::OrderTooHigh { requested } => {
                write!(f, "derivative order {requested} exceeds maximum {MAX_ORDER}")
            }
            AdError::DivisionByZero => f.write_str("division by a zero-valued jet"),
            AdError::OrderMismatch { left, right } => {
                write!(f, "jet orders differ ({left} vs {right})")
            }
            AdError::Arity { expected, got } => {
                write!(f, "expected {expected} arguments, got {got}")
            }
            AdError::NonFinite { node, op } => {
                write!(f, "non-finite adjoint at tape node {node} ({op:?})")
            }
            AdError::ForeignVariable => f.write_str("variable recorded on another tape"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for AdError {}
