use alloc::vec::Vec;

use super::{FdError, FieldGrid, Grid, Recorder, Snapshots};
use crate::problems::FisherParams;

/// Step start (1 for x ≤ 0, else 0) with u = 1 on the left and 0 on the right.
pub fn solve_fisher_fd(grid: &Grid, p: &FisherParams, snaps: &Snapshots) -> Result<FieldGrid, FdError> {
    grid.validate()?;
    let xa = grid.space[0];
    let u0: Vec<f64> = (0..xa.count).map(|i| if xa.coord(i) <= 0.0 { 1.0 } else { 0.0 }).collect();
    solve_fisher_fd_with(grid, p, &u0, (1.0, 0.0), snaps)
}

/// Explicit diffusion plus logistic growth with pinned end values.
pub fn solve_fisher_fd_with(
    grid: &Grid,
    p: &FisherParams,
    u0: &[f64],
    ends: (f64, f64),
    snaps: &Snapshots,
) -> Result<FieldGrid, FdError> {
    grid.validate()?;
    if grid.space.len() != 1 || u0.len() != grid.space[0].count {
        return Err(FdError::BadGrid("Fisher needs a 1-D grid and a matching start".into()));
    }
    let dx = grid.space[0].step;
    let dt = grid.time.step;
    let k = p.d * dt / (dx * dx);
    if k > 0.5 {
        return Err(FdError::Unstable { bound: "D·dt/dx²", value: k, limit: 0.5, suggested_dt: 0.5 * dx * dx / p.d });
    }
    let n = u0.len();
    let mut u = u0.to_vec();
    u[0] = ends.0;
    u[n - 1] = ends.1;
    let mut next = u.clone();
    let mut rec = Recorder::new(grid, 1, snaps);
    rec.record(0, grid.time.coord(0), &[&u]);
    for step in 1..grid.time.count {
        for i in 1..n - 1 {
            next[i] = u[i] + k * (u[i + 1] - 2.0 * u[i] + u[i - 1]) + p.r * dt * u[i] * (1.0 - u[i]);
        }
        core::mem::swap(&mut u, &mut next);
        rec.record(step, grid.time.coord(step), &[&u]);
    }
    Ok(rec.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fdm::presets;
    use alloc::vec;

    #[test]
    fn stays_in_unit_interval_and_front_advances() {
        let g = presets::fisher(10.0);
        let sol = solve_fisher_fd(&g, &FisherParams::default(), &Snapshots::Every(1000)).unwrap();
        assert!(sol.fields[0].iter().all(|&v| (0.0..=1.0).contains(&v)));
        let xa = sol.space[0];
        let mut last = f64::NEG_INFINITY;
        for ti in 0..sol.times.len() {
            let s = sol.slice(0, ti);
            let i = s.iter().position(|&v| v < 0.5).unwrap();
            let x = xa.coord(i);
            assert!(x >= last);
            last = x;
        }
        assert!(last > 10.0);
    }

    #[test]
    fn equilibria_are_fixed() {
        let g = presets::fisher(0.5);
        for (c, ends) in [(0.0, (0.0, 0.0)), (1.0, (1.0, 1.0))] {
            let sol =
                solve_fisher_fd_with(&g, &FisherParams::default(), &vec![c; 1001], ends, &Snapshots::Full).unwrap();
            assert!(sol.fields[0].iter().all(|&v| v == c));
        }
    }
}
