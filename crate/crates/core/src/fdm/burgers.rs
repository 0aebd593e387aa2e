use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{FdError, FieldGrid, Grid, Recorder, Snapshots};
use crate::math;
use crate::problems::BurgersParams;

fn check(grid: &Grid, p: &BurgersParams) -> Result<f64, FdError> {
    grid.validate()?;
    if grid.space.len() != 1 {
        return Err(FdError::BadGrid("Burgers problem is 1-D".into()));
    }
    let dx = grid.space[0].step;
    let r = p.nu * grid.time.step / (dx * dx);
    if r > 0.5 {
        return Err(FdError::Unstable {
            bound: "nu·dt/dx²", value: r, limit: 0.5, suggested_dt: 0.5 * dx * dx / p.nu
        });
    }
    Ok(r)
}

/// Heat equation for the Cole-Hopf variable Θ with reflecting end nodes.
pub fn burgers_theta_fd(grid: &Grid, p: &BurgersParams, snaps: &Snapshots) -> Result<FieldGrid, FdError> {
    let r = check(grid, p)?;
    let xa = grid.space[0];
    let n = xa.count;
    let mut th: Vec<f64> = (0..n).map(|i| math::exp((math::cos(PI * xa.coord(i)) - 1.0) / (2.0 * PI * p.nu))).collect();
    let mut next = th.clone();
    let mut rec = Recorder::new(grid, 1, snaps);
    rec.record(0, grid.time.coord(0), &[&th]);
    for step in 1..grid.time.count {
        next[0] = (1.0 - 2.0 * r) * th[0] + 2.0 * r * th[1];
        for i in 1..n - 1 {
            next[i] = r * th[i - 1] + (1.0 - 2.0 * r) * th[i] + r * th[i + 1];
        }
        next[n - 1] = 2.0 * r * th[n - 2] + (1.0 - 2.0 * r) * th[n - 1];
        core::mem::swap(&mut th, &mut next);
        rec.record(step, grid.time.coord(step), &[&th]);
    }
    Ok(rec.finish())
}

/// Viscous Burgers through the Cole-Hopf transform. End nodes are set to zero.
pub fn solve_burgers_fd(grid: &Grid, p: &BurgersParams, snaps: &Snapshots) -> Result<FieldGrid, FdError> {
    let mut theta = burgers_theta_fd(grid, p, snaps)?;
    let n = grid.space[0].count;
    let dx = grid.space[0].step;
    let steps: Vec<usize> =
        theta.times.iter().map(|t| math::round((t - grid.time.origin) / grid.time.step) as usize).collect();
    let th = &mut theta.fields[0];
    let mut u = alloc::vec![0.0; th.len()];
    for (s, step) in steps.iter().enumerate() {
        let row = &th[s * n..(s + 1) * n];
        if let Some(node) = row.iter().position(|v| !(*v > 0.0)) {
            return Err(FdError::TransformSingular { step: *step, node });
        }
        for i in 1..n - 1 {
            u[s * n + i] = -(p.nu / dx) * (row[i + 1] - row[i - 1]) / row[i];
        }
    }
    *th = u;
    Ok(theta)
}
