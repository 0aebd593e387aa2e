use alloc::vec;
use alloc::vec::Vec;

use super::{all_finite, FdError, FieldGrid, Grid, Recorder, Snapshots};
use crate::oracles::kdv_exact;
use crate::problems::KdvParams;

/// Soliton start from the closed form.
pub fn solve_kdv_fd(grid: &Grid, p: &KdvParams, snaps: &Snapshots) -> Result<FieldGrid, FdError> {
    grid.validate()?;
    let xa = grid.space[0];
    let (u0, v0): (Vec<f64>, Vec<f64>) = (0..xa.count).map(|i| kdv_exact(xa.coord(i), 0.0, p)).unzip();
    solve_kdv_fd_with(grid, p, &u0, &v0, snaps)
}

/// Explicit upwind/centred scheme for the coupled pair.
///
/// Nodes `2..=n-4` are updated; the two nodes at the left end and three at the
/// right end are held at zero after the first level. No stability bound is
/// known for this scheme, so it runs with a divergence check instead.
pub fn solve_kdv_fd_with(
    grid: &Grid,
    p: &KdvParams,
    u0: &[f64],
    v0: &[f64],
    snaps: &Snapshots,
) -> Result<FieldGrid, FdError> {
    grid.validate()?;
    if grid.space.len() != 1 {
        return Err(FdError::BadGrid("KdV problem is 1-D".into()));
    }
    let n = grid.space[0].count;
    if n < 7 || u0.len() != n || v0.len() != n {
        return Err(FdError::BadGrid("KdV needs at least 7 nodes and matching start arrays".into()));
    }
    let dx = grid.space[0].step;
    let dt = grid.time.step;
    let al = dt / dx;
    let be = dt / (dx * dx * dx);
    let (a, b) = (p.a, p.b);

    let mut u = u0.to_vec();
    let mut v = v0.to_vec();
    let mut un = vec![0.0; n];
    let mut vn = vec![0.0; n];
    let mut rec = Recorder::new(grid, 2, snaps);
    rec.record(0, grid.time.coord(0), &[&u, &v]);
    for step in 1..grid.time.count {
        for i in 2..n - 3 {
            let d3u = u[i + 2] - 2.0 * u[i + 1] + 2.0 * u[i - 1] - u[i - 2];
            let d3v = v[i + 2] - 2.0 * v[i + 1] + 2.0 * v[i - 1] - v[i - 2];
            un[i] = u[i] + 6.0 * a * al * u[i] * (u[i] - u[i - 1])
                - 2.0 * b * al * v[i] * (v[i] - v[i - 1])
                - 0.5 * a * be * d3u;
            vn[i] = v[i] - 3.0 * al * u[i] * (v[i] - v[i - 1]) + 0.5 * be * d3v;
        }
        core::mem::swap(&mut u, &mut un);
        core::mem::swap(&mut v, &mut vn);
        if !all_finite(&u) || !all_finite(&v) {
            return Ok(rec.diverge(step, &grid.time));
        }
        rec.record(step, grid.time.coord(step), &[&u, &v]);
    }
    Ok(rec.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fdm::presets;

    #[test]
    fn zero_start_stays_zero() {
        let g = presets::kdv();
        let z = vec![0.0; 500];
        let sol = solve_kdv_fd_with(&g, &KdvParams::default(), &z, &z, &Snapshots::Every(50)).unwrap();
        assert!(sol.fields.iter().all(|f| f.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn blow_up_is_flagged() {
        let mut g = presets::kdv();
        g.space[0].step = 0.05;
        g.space[0].count = 200;
        g.time.count = 200;
        let sol = solve_kdv_fd(&g, &KdvParams::default(), &Snapshots::Full).unwrap();
        assert!(sol.diverged_at.is_some());
        assert_eq!(sol.times.len(), 200);
    }
}
