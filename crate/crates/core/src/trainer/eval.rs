//! Network evaluation on grids and the reference solutions it is scored against.

use alloc::vec;
use alloc::vec::Vec;

use super::TrainError;
use crate::fdm::{self, presets, Axis, FieldGrid, Snapshots};
use crate::network::{BatchPass, ChannelSpec, MlpConfig, NetworkError};
use crate::oracles::{oracle_for, Oracle, OracleError};
use crate::problems::{Params, PdeProblem, ProblemId};

const CHUNK: usize = 8192;

/// Network values at every node of `space × times`.
///
/// Node order within a slice is x fastest, then y; slices follow `times`.
pub fn evaluate_on_grid(
    net: &MlpConfig,
    params: &[f64],
    space: &[Axis],
    times: &[f64],
) -> Result<FieldGrid, NetworkError> {
    let slice: usize = space.iter().map(|a| a.count).product();
    let total = slice * times.len();
    let dim = space.len() + 1;
    let mut fields = vec![Vec::with_capacity(total); net.output_dim];
    let mut pts = Vec::with_capacity(CHUNK * dim);
    let flush = |pts: &mut Vec<f64>, fields: &mut Vec<Vec<f64>>| -> Result<(), NetworkError> {
        if pts.is_empty() {
            return Ok(());
        }
        let pass = BatchPass::forward(net, params, pts, ChannelSpec::values(dim))?;
        for p in 0..pass.len() {
            for (f, out) in fields.iter_mut().enumerate() {
                out.push(pass.output(0, p, f));
            }
        }
        pts.clear();
        Ok(())
    };
    for &t in times {
        for k in 0..slice {
            let mut r = k;
            for a in space {
                pts.push(a.coord(r % a.count));
                r /= a.count;
            }
            pts.push(t);
            if pts.len() == CHUNK * dim {
                flush(&mut pts, &mut fields)?;
            }
        }
    }
    flush(&mut pts, &mut fields)?;
    Ok(FieldGrid { space: space.to_vec(), times: times.to_vec(), fields, diverged_at: None })
}

/// Oracle values on the same node layout as [`evaluate_on_grid`].
pub fn oracle_on_grid(oracle: &Oracle, fields: usize, space: &[Axis], times: &[f64]) -> Result<FieldGrid, OracleError> {
    let slice: usize = space.iter().map(|a| a.count).product();
    let mut out = vec![Vec::with_capacity(slice * times.len()); fields];
    let mut p = vec![0.0; space.len() + 1];
    for &t in times {
        for k in 0..slice {
            let mut r = k;
            for (a, slot) in space.iter().zip(p.iter_mut()) {
                *slot = a.coord(r % a.count);
                r /= a.count;
            }
            p[space.len()] = t;
            let v = oracle.eval(&p)?;
            for (f, o) in out.iter_mut().enumerate() {
                o.push(v[f]);
            }
        }
    }
    Ok(FieldGrid { space: space.to_vec(), times: times.to_vec(), fields: out, diverged_at: None })
}

/// RMSE over all fields plus one value per field.
#[derive(Debug, Clone, PartialEq)]
pub struct Rmse {
    pub all: f64,
    pub per_field: Vec<f64>,
}

impl Rmse {
    pub fn between(a: &FieldGrid, b: &FieldGrid) -> Result<Self, TrainError> {
        let all = fdm::rmse(a, b)?;
        let per_field = (0..a.n_fields()).map(|f| fdm::rmse_fields(a, b, Some(f))).collect::<Result<_, _>>()?;
        Ok(Rmse { all, per_field })
    }
}

/// Evaluation nodes and whichever references exist for a problem.
#[derive(Debug, Clone)]
pub struct References {
    pub space: Vec<Axis>,
    pub times: Vec<f64>,
    pub oracle: Option<FieldGrid>,
    pub fd: Option<FieldGrid>,
}

/// Build the comparison grid of `problem` and its references.
///
/// The grid is the problem's finite-difference grid thinned by `scale` along
/// every axis (after a fixed per-problem time thinning for the long
/// reaction-diffusion runs), keeping at least 11 time slices.
pub fn references(problem: &PdeProblem, scale: usize) -> Result<References, TrainError> {
    let scale = scale.max(1);
    let full = |g: &fdm::Grid| -> Vec<(f64, f64)> { g.space.iter().map(|a| (a.origin, a.last())).collect() };
    let (fd, bounds, time_stride) = match (problem.id, problem.params) {
        (ProblemId::Toy, Params::Toy(p)) => {
            let g = presets::toy();
            (Some(fdm::solve_toy_fd(&g, &p, &Snapshots::Full)?), full(&g), 1)
        }
        (ProblemId::Burgers, Params::Burgers(p)) => {
            let g = presets::burgers_coarse();
            (Some(fdm::solve_burgers_fd(&g, &p, &Snapshots::Full)?), full(&g), 1)
        }
        (ProblemId::Heat2d, Params::Heat(p)) => {
            let g = presets::heat2d();
            (Some(fdm::solve_heat2d_fd(&g, &p, &Snapshots::Full)?), full(&g), 1)
        }
        (ProblemId::Kdv, Params::Kdv(p)) => {
            let g = presets::kdv();
            (Some(fdm::solve_kdv_fd(&g, &p, &Snapshots::Full)?), full(&g), 1)
        }
        (ProblemId::Fisher, Params::Fisher(p)) => {
            let g = presets::fisher(problem.domain.time.hi);
            let iv = problem.domain.space[0];
            (Some(fdm::solve_fisher_fd(&g, &p, &Snapshots::Full)?), vec![(iv.lo, iv.hi)], 1)
        }
        (ProblemId::Turing1, Params::Turing1(p)) => {
            let g = presets::turing1(problem.domain.time.hi);
            let b0: Vec<f64> =
                (0..g.space[0].count).map(|i| problem.initial_value(&[g.space[0].coord(i)])[0]).collect();
            let c0 = vec![0.0; b0.len()];
            let sol = fdm::solve_turing1_fd_with(&g, &p, &b0, &c0, &Snapshots::Every(10))?;
            (Some(sol), full(&g), 1)
        }
        (ProblemId::Turing2, Params::Turing2(p)) => {
            let g = presets::turing2(problem.domain.time.hi);
            let sol = fdm::solve_turing2_fd(&g, &p, problem.noise_seed, &Snapshots::Every(1000))?;
            (Some(sol), full(&g), 1)
        }
        _ => (None, Vec::new(), 1),
    };
    let (space, times, fd) = match fd {
        Some(sol) => {
            // Thin time by the scale too, but keep at least 11 slices.
            let cap = ((sol.times.len() - 1) / 10).max(1);
            let r = sol.restrict(&bounds, scale, (time_stride * scale).min(cap));
            (r.space.clone(), r.times.clone(), Some(r))
        }
        None => {
            // Time-only problems: 101 nodes across the interval.
            let iv = problem.domain.time;
            let n = (100 / scale).max(1);
            (Vec::new(), (0..=n).map(|i| iv.lo + iv.width() * i as f64 / n as f64).collect(), None)
        }
    };
    let oracle = match oracle_for(problem) {
        Some(o) => Some(oracle_on_grid(&o, problem.fields(), &space, &times)?),
        None => None,
    };
    Ok(References { space, times, oracle, fd })
}
