//! Minimizers over flat parameter vectors.

mod adam;
mod lbfgs;

pub use adam::AdamState;
pub use lbfgs::{LbfgsState, LbfgsStep};

use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum OptimError {
    /// A gradient entry is NaN or infinite.
    NonFiniteGradient { index: usize, value: f64 },
    /// Parameter and gradient lengths differ.
    Length { params: usize, grad: usize },
}

impl fmt::Display for OptimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OptimError::NonFiniteGradient { index, value } => {
                write!(f, "gradient entry {index} is {value}")
            }
            OptimError::Length { params, grad } => {
                write!(f, "{params} parameters but {grad} gradient entries")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for OptimError {}

pub(crate) fn check_grad(params: &[f64], grad: &[f64]) -> Result<(), OptimError> {
    if params.len() != grad.len() {
        return Err(OptimError::Length { params: params.len(), grad: grad.len() });
    }
    match grad.iter().position(|g| !g.is_finite()) {
        Some(index) => Err(OptimError::NonFiniteGradient { index, value: grad[index] }),
        None => Ok(()),
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
