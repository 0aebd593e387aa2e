use alloc::vec::Vec;

use super::{all_finite, FdError, FieldGrid, Grid, Recorder, Snapshots};
use crate::oracles::heat2d_exact;
use crate::problems::HeatParams;

/// 2-D heat equation from the Gaussian start with oracle values on the edge ring.
pub fn solve_heat2d_fd(grid: &Grid, p: &HeatParams, snaps: &Snapshots) -> Result<FieldGrid, FdError> {
    let a = p.alpha;
    solve_heat2d_fd_with(grid, p, &|x, y| heat2d_exact(x, y, 0.0, a), &|x, y, t| heat2d_exact(x, y, t, a), snaps)
}

/// Explicit five-point scheme with caller-supplied start and edge values.
pub fn solve_heat2d_fd_with(
    grid: &Grid,
    p: &HeatParams,
    init: &dyn Fn(f64, f64) -> f64,
    edge: &dyn Fn(f64, f64, f64) -> f64,
    snaps: &Snapshots,
) -> Result<FieldGrid, FdError> {
    grid.validate()?;
    if grid.space.len() != 2 {
        return Err(FdError::BadGrid("heat problem is 2-D".into()));
    }
    let (xa, ya) = (grid.space[0], grid.space[1]);
    let dt = grid.time.step;
    let (rx, ry) = (p.alpha * dt / (xa.step * xa.step), p.alpha * dt / (ya.step * ya.step));
    if rx + ry > 0.5 {
        return Err(FdError::Unstable {
            bound: "alpha·dt·(1/dx² + 1/dy²)",
            value: rx + ry,
            limit: 0.5,
            suggested_dt: 0.5 / (p.alpha * (1.0 / (xa.step * xa.step) + 1.0 / (ya.step * ya.step))),
        });
    }
    let (nx, ny) = (xa.count, ya.count);
    let mut u: Vec<f64> = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            u.push(init(xa.coord(i), ya.coord(j)));
        }
    }
    let mut next = u.clone();
    let mut rec = Recorder::new(grid, 1, snaps);
    rec.record(0, grid.time.coord(0), &[&u]);
    for step in 1..grid.time.count {
        let t = grid.time.coord(step);
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let k = j * nx + i;
                next[k] = u[k] + rx * (u[k + 1] - 2.0 * u[k] + u[k - 1]) + ry * (u[k + nx] - 2.0 * u[k] + u[k - nx]);
            }
        }
        for i in 0..nx {
            next[i] = edge(xa.coord(i), ya.coord(0), t);
            next[(ny - 1) * nx + i] = edge(xa.coord(i), ya.coord(ny - 1), t);
        }
        for j in 0..ny {
            next[j * nx] = edge(xa.coord(0), ya.coord(j), t);
            next[j * nx + nx - 1] = edge(xa.coord(nx - 1), ya.coord(j), t);
        }
        core::mem::swap(&mut u, &mut next);
        if !all_finite(&u) {
            return Ok(rec.diverge(step, &grid.time));
        }
        rec.record(step, t, &[&u]);
    }
    Ok(rec.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fdm::presets;
    use crate::math;

    #[test]
    fn tracks_peak_and_oracle() {
        let g = presets::heat2d();
        let sol = solve_heat2d_fd(&g, &HeatParams::default(), &Snapshots::Every(20)).unwrap();
        let mut sum = 0.0;
        let mut n = 0;
        for (ti, &t) in sol.times.iter().enumerate() {
            let peak = sol.at(0, ti, &[50, 50]);
            assert!((peak - 1.0 / (1.0 + 8.0 * t)).abs() < 1e-2, "t={t}: {peak}");
        }
        let last = sol.times.len() - 1;
        for k in 0..sol.slice_len() {
            let p = sol.node_point(last, k);
            let d = sol.fields[0][last * sol.slice_len() + k] - heat2d_exact(p[0], p[1], p[2], 2.0);
            sum += d * d;
            n += 1;
        }
        assert!(math::sqrt(sum / n as f64) <= 5e-3);
        // Mass conservation.
        let mass = |ti: usize| sol.slice(0, ti).iter().sum::<f64>() * 0.04;
        assert!((mass(last) - mass(0)).abs() / mass(0) < 0.02);
    }

    #[test]
    fn zero_stays_zero() {
        let g = presets::heat2d();
        let sol =
            solve_heat2d_fd_with(&g, &HeatParams::default(), &|_, _| 0.0, &|_, _, _| 0.0, &Snapshots::Full).unwrap();
        assert!(sol.fields[0].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn refuses_unstable() {
        let mut g = presets::heat2d();
        g.time.step = 0.01;
        assert!(matches!(solve_heat2d_fd(&g, &HeatParams::default(), &Snapshots::Full), Err(FdError::Unstable { .. })));
    }
}
