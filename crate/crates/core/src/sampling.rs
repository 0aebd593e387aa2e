//! Seeded collocation sets: initial data, face data and interior points.

use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::problems::{Condition, PdeProblem, ProblemError};

#[derive(Debug, Clone, PartialEq)]
pub enum SamplingError {
    /// `n_data` does not split evenly over the initial slice and faces.
    Counts {
        n_data: usize,
        divisor: usize,
    },
    Problem(ProblemError),
}

impl fmt::Display for SamplingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SamplingError::Counts { n_data, divisor } => {
                write!(f, "data count {n_data} is not a positive multiple of {divisor}")
            }
            SamplingError::Problem(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SamplingError {}

impl From<ProblemError> for SamplingError {
    fn from(e: ProblemError) -> Self {
        SamplingError::Problem(e)
    }
}

/// A point with the condition it carries. Unused trailing coordinates are 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataPoint {
    pub point: [f64; 3],
    pub cond: Condition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollocationSet {
    pub dim: usize,
    pub initial: Vec<DataPoint>,
    pub boundary: Vec<DataPoint>,
    /// Row-major `n × dim`; the data points are appended at the end.
    pub interior: Vec<f64>,
}

impl CollocationSet {
    pub fn interior_len(&self) -> usize {
        self.interior.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn interior_point(&self, i: usize) -> &[f64] {
        &self.interior[i * self.dim..(i + 1) * self.dim]
    }
}

/// How many equal shares `n_data` is cut into for `problem`.
///
/// 1-D space: a quarter per face and half on the initial slice. 2-D space:
/// an eighth per face and half initial. Problems without faces put
/// everything on the initial slice.
pub fn data_divisor(problem: &PdeProblem) -> usize {
    match problem.faces().len() {
        0 => 1,
        2 => 4,
        _ => 8,
    }
}

/// Round `n` down to a usable data count for `problem`, never below one share.
pub fn round_data_count(problem: &PdeProblem, n: usize) -> usize {
    let d = data_divisor(problem);
    (n / d).max(1) * d
}

pub fn sample(
    problem: &PdeProblem,
    n_data: usize,
    n_interior: usize,
    seed: u64,
) -> Result<CollocationSet, SamplingError> {
    let divisor = data_divisor(problem);
    if n_data == 0 || !n_data.is_multiple_of(divisor) {
        return Err(SamplingError::Counts { n_data, divisor });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dom = &problem.domain;
    let dim = dom.dim();
    let ta = problem.time_axis();
    let faces = problem.faces();
    let n_initial = if faces.is_empty() { n_data } else { n_data / 2 };
    let per_face = if faces.is_empty() { 0 } else { n_data / divisor };

    let mut initial = Vec::with_capacity(n_initial);
    for _ in 0..n_initial {
        let mut point = [0.0; 3];
        for (a, slot) in point.iter_mut().enumerate().take(ta) {
            let iv = dom.axis(a);
            *slot = iv.lo + rng.gen::<f64>() * iv.width();
        }
        point[ta] = dom.time.lo;
        let cond = problem.ic_bc_values(&point[..dim])?;
        initial.push(DataPoint { point, cond });
    }

    let t_lo = dom.time.lo.max(problem.boundary_t_min);
    let mut boundary = Vec::with_capacity(per_face * faces.len());
    for &face in &faces {
        for _ in 0..per_face {
            let mut point = [0.0; 3];
            for (a, slot) in point.iter_mut().enumerate().take(ta) {
                let iv = dom.axis(a);
                *slot = if a == face.axis {
                    if face.upper {
                        iv.hi
                    } else {
                        iv.lo
                    }
                } else {
                    iv.lo + rng.gen::<f64>() * iv.width()
                };
            }
            point[ta] = t_lo + rng.gen::<f64>() * (dom.time.hi - t_lo);
            let cond = problem.boundary_condition(face, &point[..dim]);
            boundary.push(DataPoint { point, cond });
        }
    }

    let mut interior = Vec::with_capacity((n_interior + n_data) * dim);
    for _ in 0..n_interior {
        for a in 0..dim {
            let iv = dom.axis(a);
            // Rejection keeps both endpoints out.
            let mut v = iv.lo + rng.gen::<f64>() * iv.width();
            while v <= iv.lo || v >= iv.hi {
                v = iv.lo + rng.gen::<f64>() * iv.width();
            }
            interior.push(v);
        }
    }
    for d in initial.iter().chain(&boundary) {
        interior.extend_from_slice(&d.point[..dim]);
    }
    Ok(CollocationSet { dim, initial, boundary, interior })
}
