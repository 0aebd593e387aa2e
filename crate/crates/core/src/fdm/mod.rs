//! Finite-difference reference solvers on regular grids.
//!
//! Every solver returns a [`FieldGrid`]: stored time slices of one or two
//! fields. Within a slice values are row-major with the x index fastest, so
//! node `(t, y, x)` of a 2-D grid sits at `(t·ny + y)·nx + x`.

mod burgers;
mod fisher;
mod heat;
mod kdv;
mod toy;
mod turing;

pub use burgers::{burgers_theta_fd, solve_burgers_fd};
pub use fisher::{solve_fisher_fd, solve_fisher_fd_with};
pub use heat::{solve_heat2d_fd, solve_heat2d_fd_with};
pub use kdv::{solve_kdv_fd, solve_kdv_fd_with};
pub use toy::solve_toy_fd;
pub use turing::{
    solve_turing1_fd, solve_turing1_fd_with, solve_turing2_fd, solve_turing2_fd_with, spatial_std, thomas_solve,
};

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub enum FdError {
    /// Grid is malformed (non-positive step, too few nodes).
    BadGrid(String),
    /// Step sizes violate the scheme's stability bound.
    Unstable { bound: &'static str, value: f64, limit: f64, suggested_dt: f64 },
    /// Cole-Hopf variable reached a non-positive value.
    TransformSingular { step: usize, node: usize },
    /// Tridiagonal system has a zero pivot.
    SingularSystem,
}

impl fmt::Display for FdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FdError::BadGrid(m) => write!(f, "bad grid: {m}"),
            FdError::Unstable { bound, value, limit, suggested_dt } => {
                write!(f, "stability bound violated: {bound} = {value} > {limit}; try dt <= {suggested_dt}")
            }
            FdError::TransformSingular { step, node } => {
                write!(f, "Cole-Hopf variable not positive at step {step}, node {node}")
            }
            FdError::SingularSystem => f.write_str("tridiagonal system has a zero pivot"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FdError {}

/// Uniform axis: `origin + i·step` for `i < count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub origin: f64,
    pub step: f64,
    pub count: usize,
}

impl Axis {
    pub const fn new(origin: f64, step: f64, count: usize) -> Self {
        Axis { origin, step, count }
    }

    /// `count` nodes spanning `[lo, hi]` inclusive.
    pub fn spanning(lo: f64, hi: f64, count: usize) -> Self {
        Axis { origin: lo, step: (hi - lo) / (count - 1) as f64, count }
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.step
    }

    pub fn last(&self) -> f64 {
        self.coord(self.count - 1)
    }
}

/// Space-time grid a solver marches on.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub space: Vec<Axis>,
    pub time: Axis,
}

impl Grid {
    pub fn new(space: Vec<Axis>, time: Axis) -> Result<Self, FdError> {
        let g = Grid { space, time };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), FdError> {
        for (i, a) in self.space.iter().enumerate() {
            if !(a.step > 0.0) || a.count < 3 {
                return Err(FdError::BadGrid(alloc::format!("spatial axis {i} needs step > 0 and at least 3 nodes")));
            }
        }
        if !(self.time.step > 0.0) || self.time.count < 1 {
            return Err(FdError::BadGrid("time axis needs step > 0 and at least 1 node".into()));
        }
        Ok(())
    }

    pub fn slice_len(&self) -> usize {
        self.space.iter().map(|a| a.count).product()
    }
}

/// Which time levels a solver keeps.
#[derive(Debug, Clone, PartialEq)]
pub enum Snapshots {
    /// Every time level.
    Full,
    /// Levels nearest to the given times (the final level is always kept).
    Times(Vec<f64>),
    /// Every n-th level plus the final one.
    Every(usize),
}

/// Stored solution slices.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub space: Vec<Axis>,
    pub times: Vec<f64>,
    /// One array per field, `times.len() × slice_len` values each.
    pub fields: Vec<Vec<f64>>,
    /// Step index at which the solution stopped being finite.
    pub diverged_at: Option<usize>,
}

impl FieldGrid {
    pub fn slice_len(&self) -> usize {
        self.space.iter().map(|a| a.count).product()
    }

    pub fn n_fields(&self) -> usize {
        self.fields.len()
    }

    pub fn slice(&self, field: usize, ti: usize) -> &[f64] {
        let n = self.slice_len();
        &self.fields[field][ti * n..(ti + 1) * n]
    }

    /// Value at time index `ti` and spatial indices `idx` (x first).
    pub fn at(&self, field: usize, ti: usize, idx: &[usize]) -> f64 {
        let mut off = 0;
        let mut stride = 1;
        for (a, i) in self.space.iter().zip(idx) {
            off += i * stride;
            stride *= a.count;
        }
        self.fields[field][ti * stride + off]
    }

    /// Coordinates (space then time) of flat node `k` within a slice at time `ti`.
    pub fn node_point(&self, ti: usize, k: usize) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.space.len() + 1);
        let mut r = k;
        for a in &self.space {
            p.push(a.coord(r % a.count));
            r /= a.count;
        }
        p.push(self.times[ti]);
        p
    }

    /// Index of the stored time closest to `t`.
    pub fn nearest_time(&self, t: f64) -> usize {
        let mut best = 0;
        for (i, &ti) in self.times.iter().enumerate() {
            if math::abs(ti - t) < math::abs(self.times[best] - t) {
                best = i;
            }
        }
        best
    }

    /// Keep every `stride`-th node along each spatial axis and every
    /// `time_stride`-th stored time, restricted to spatial boxes `bounds`.
    pub fn restrict(&self, bounds: &[(f64, f64)], stride: usize, time_stride: usize) -> FieldGrid {
        let stride = stride.max(1);
        let time_stride = time_stride.max(1);
        let eps = 1e-9;
        let mut keep: Vec<Vec<usize>> = Vec::new();
        let mut axes = Vec::new();
        for (a, &(lo, hi)) in self.space.iter().zip(bounds) {
            let idx: Vec<usize> = (0..a.count)
                .filter(|&i| {
                    let x = a.coord(i);
                    x >= lo - eps * a.step && x <= hi + eps * a.step
                })
                .collect();
            let idx: Vec<usize> = idx.iter().copied().step_by(stride).collect();
            axes.push(Axis::new(a.coord(idx[0]), a.step * stride as f64, idx.len()));
            keep.push(idx);
        }
        let tkeep: Vec<usize> = (0..self.times.len()).step_by(time_stride).collect();
        let fields = self
            .fields
            .iter()
            .enumerate()
            .map(|(f, _)| {
                let mut out = Vec::new();
                for &ti in &tkeep {
                    match keep.len() {
                        1 => out.extend(keep[0].iter().map(|&i| self.at(f, ti, &[i]))),
                        2 => {
                            for &j in &keep[1] {
                                out.extend(keep[0].iter().map(|&i| self.at(f, ti, &[i, j])));
                            }
                        }
                        _ => out.push(self.fields[f][ti]),
                    }
                }
                out
            })
            .collect();
        FieldGrid {
            space: axes,
            times: tkeep.iter().map(|&i| self.times[i]).collect(),
            fields,
            diverged_at: self.diverged_at,
        }
    }
}

/// Collects the requested time levels while a solver marches.
pub(crate) struct Recorder {
    keep: Vec<bool>,
    grid: FieldGrid,
}

impl Recorder {
    pub fn new(grid: &Grid, n_fields: usize, snaps: &Snapshots) -> Self {
        let n = grid.time.count;
        let mut keep = vec![false; n];
        match snaps {
            Snapshots::Full => keep.iter_mut().for_each(|k| *k = true),
            Snapshots::Every(e) => {
                for i in (0..n).step_by((*e).max(1)) {
                    keep[i] = true;
                }
            }
            Snapshots::Times(ts) => {
                for &t in ts {
                    let i = math::round((t - grid.time.origin) / grid.time.step);
                    keep[(i.max(0.0) as usize).min(n - 1)] = true;
                }
            }
        }
        keep[n - 1] = true;
        let stored = keep.iter().filter(|k| **k).count();
        let len = grid.slice_len();
        Recorder {
            keep,
            grid: FieldGrid {
                space: grid.space.clone(),
                times: Vec::with_capacity(stored),
                fields: (0..n_fields).map(|_| Vec::with_capacity(stored * len)).collect(),
                diverged_at: None,
            },
        }
    }

    pub fn record(&mut self, step: usize, t: f64, slices: &[&[f64]]) {
        if self.keep[step] {
            self.grid.times.push(t);
            for (f, s) in self.grid.fields.iter_mut().zip(slices) {
                f.extend_from_slice(s);
            }
        }
    }

    /// Stop at `step`; remaining requested levels are filled with NaN.
    pub fn diverge(mut self, step: usize, time: &Axis) -> FieldGrid {
        let len = self.grid.slice_len();
        self.grid.diverged_at = Some(step);
        for s in step..self.keep.len() {
            if self.keep[s] && self.grid.times.last().is_none_or(|&t| t < time.coord(s)) {
                self.grid.times.push(time.coord(s));
                for f in self.grid.fields.iter_mut() {
                    f.extend(std::iter::repeat_n(f64::NAN, len));
                }
            }
        }
        self.grid
    }

    pub fn finish(self) -> FieldGrid {
        self.grid
    }
}

pub(crate) fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Root-mean-square difference of two equally shaped grids over all nodes and fields.
pub fn rmse(a: &FieldGrid, b: &FieldGrid) -> Result<f64, FdError> {
    rmse_fields(a, b, None)
}

/// As [`rmse`] but for one field only when `field` is given.
pub fn rmse_fields(a: &FieldGrid, b: &FieldGrid, field: Option<usize>) -> Result<f64, FdError> {
    let same_axes = a.space.len() == b.space.len()
        && a.space.iter().zip(&b.space).all(|(x, y)| x.count == y.count)
        && a.times.len() == b.times.len()
        && a.fields.len() == b.fields.len();
    if !same_axes {
        return Err(FdError::BadGrid("grids differ in shape".into()));
    }
    let range = match field {
        Some(f) if f < a.fields.len() => f..f + 1,
        Some(_) => return Err(FdError::BadGrid("field index out of range".into())),
        None => 0..a.fields.len(),
    };
    let mut sum = 0.0;
    let mut n = 0usize;
    for f in range {
        for (x, y) in a.fields[f].iter().zip(&b.fields[f]) {
            sum += (x - y) * (x - y);
            n += 1;
        }
    }
    if n == 0 {
        return Err(FdError::BadGrid("empty grids".into()));
    }
    Ok(math::sqrt(sum / n as f64))
}

/// Default reference grids for each problem.
pub mod presets {
    use super::{Axis, Grid};
    use alloc::vec;

    /// Δx = 0.1, Δt = 0.01 on [0,2]×[0,1].
    pub fn toy() -> Grid {
        Grid { space: vec![Axis::new(0.0, 0.1, 21)], time: Axis::new(0.0, 0.01, 101) }
    }

    /// 100 nodes x = 0, 0.01, …, 0.99, r = 1/4, 4000 levels (x = 1 left out).
    pub fn burgers_coarse() -> Grid {
        Grid { space: vec![Axis::new(0.0, 0.01, 100)], time: Axis::new(0.0, 2.5e-5, 4000) }
    }

    /// 101 nodes covering [0,1] with the same Δt.
    pub fn burgers_full() -> Grid {
        Grid { space: vec![Axis::new(0.0, 0.01, 101)], time: Axis::new(0.0, 2.5e-5, 4001) }
    }

    /// Δx = Δy = 0.2 on [-10,10]², Δt = 0.0025 to t = 0.25.
    pub fn heat2d() -> Grid {
        Grid { space: vec![Axis::new(-10.0, 0.2, 101), Axis::new(-10.0, 0.2, 101)], time: Axis::new(0.0, 0.0025, 101) }
    }

    /// x = -250, …, 249 (Δx = 1), t = 0, …, 9.98 (Δt = 0.02).
    pub fn kdv() -> Grid {
        Grid { space: vec![Axis::new(-250.0, 1.0, 500)], time: Axis::new(0.0, 0.02, 500) }
    }

    /// Δx = 0.1 on [-50,50], Δt = 0.001 to `t_end`.
    pub fn fisher(t_end: f64) -> Grid {
        let steps = libm::round(t_end / 0.001) as usize;
        Grid { space: vec![Axis::new(-50.0, 0.1, 1001)], time: Axis::new(0.0, 0.001, steps + 1) }
    }

    /// 3000 nodes on [0,3000], Δt = 1 to `t_end`.
    pub fn turing1(t_end: f64) -> Grid {
        Grid {
            space: vec![Axis::spanning(0.0, 3000.0, 3000)],
            time: Axis::new(0.0, 1.0, libm::round(t_end) as usize + 1),
        }
    }

    /// 100×100 cell centres on [-1,1]², Δt = 0.001 to `t_end`.
    pub fn turing2(t_end: f64) -> Grid {
        let dx = 0.02;
        let steps = libm::round(t_end / 0.001) as usize;
        Grid {
            space: vec![Axis::new(-1.0 + 0.5 * dx, dx, 100), Axis::new(-1.0 + 0.5 * dx, dx, 100)],
            time: Axis::new(0.0, 0.001, steps + 1),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(vals: &[f64]) -> FieldGrid {
        FieldGrid {
            space: vec![Axis::new(0.0, 1.0, vals.len())],
            times: vec![0.0],
            fields: vec![vals.to_vec()],
            diverged_at: None,
        }
    }

    #[test]
    fn rmse_examples() {
        let a = grid1(&[0.0, 0.0]);
        let b = grid1(&[3.0, 4.0]);
        assert!((rmse(&a, &b).unwrap() - 3.5355339059327378).abs() < 1e-15);
        assert_eq!(rmse(&a, &a).unwrap(), 0.0);
        assert_eq!(rmse(&a, &b).unwrap(), rmse(&b, &a).unwrap());
        assert!(rmse(&a, &grid1(&[1.0, 2.0, 3.0])).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(vec![Axis::new(0.0, 0.1, 2)], Axis::new(0.0, 0.1, 3)).is_err());
        assert!(Grid::new(vec![Axis::new(0.0, -0.1, 5)], Axis::new(0.0, 0.1, 3)).is_err());
        assert!(Grid::new(vec![Axis::new(0.0, 0.1, 5)], Axis::new(0.0, 0.1, 3)).is_ok());
    }

    #[test]
    fn restrict_and_index() {
        let space = vec![Axis::new(0.0, 1.0, 4), Axis::new(0.0, 1.0, 3)];
        let vals: Vec<f64> = (0..24).map(|v| v as f64).collect();
        let g = FieldGrid { space, times: vec![0.0, 1.0], fields: vec![vals], diverged_at: None };
        assert_eq!(g.at(0, 1, &[2, 1]), (12 + 4 + 2) as f64);
        assert_eq!(g.node_point(1, 6), vec![2.0, 1.0, 1.0]);
        let r = g.restrict(&[(1.0, 3.0), (0.0, 2.0)], 2, 1);
        assert_eq!(r.space[0].count, 2);
        assert_eq!(r.space[1].count, 2);
        assert_eq!(r.fields[0], vec![1.0, 3.0, 9.0, 11.0, 13.0, 15.0, 21.0, 23.0]);
    }
}
