use alloc::vec::Vec;

use super::{FdError, FieldGrid, Grid, Recorder, Snapshots};
use crate::math;
use crate::problems::ToyParams;

/// Cubic Lagrange weights for nodes at integer offsets `offs` evaluated at `theta`.
fn lagrange(offs: [f64; 4], theta: f64) -> [f64; 4] {
    let mut w = [1.0; 4];
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                w[i] *= (theta - offs[j]) / (offs[i] - offs[j]);
            }
        }
    }
    w
}

/// Advection-reaction `a·u_x + b·u_t + c·u = 0` with the exact boundary data.
///
/// Each step follows the characteristic through every interior node back one
/// time step, interpolates the old profile there with a cubic, and applies the
/// exact reaction factor along the path.
pub fn solve_toy_fd(grid: &Grid, p: &ToyParams, snaps: &Snapshots) -> Result<FieldGrid, FdError> {
    grid.validate()?;
    if grid.space.len() != 1 {
        return Err(FdError::BadGrid("toy problem is 1-D".into()));
    }
    let xa = grid.space[0];
    let (dx, dt) = (xa.step, grid.time.step);
    let speed = p.a / p.b;
    let courant = math::abs(speed) * dt / dx;
    if courant > 0.5 {
        return Err(FdError::Unstable {
            bound: "|a/b|·dt/dx",
            value: courant,
            limit: 0.5,
            suggested_dt: 0.5 * dx / math::abs(speed),
        });
    }
    let decay = math::exp(-p.c / p.b * dt);
    let n = xa.count;
    let g1 = |t: f64| 6.0 * math::exp(-2.0 * t);
    let g2 = |t: f64| 6.0 * math::exp(-6.0 - 2.0 * t);

    let mut u: Vec<f64> = (0..n).map(|i| 6.0 * math::exp(-3.0 * xa.coord(i))).collect();
    let mut next = u.clone();
    let mut rec = Recorder::new(grid, 1, snaps);
    rec.record(0, grid.time.coord(0), &[&u]);

    // Foot of the characteristic sits `shift` cells from the node.
    let shift = -speed * dt / dx;
    let dir: isize = if shift >= 0.0 { 1 } else { -1 };
    let theta = math::abs(shift);
    let centred = lagrange([-1.0, 0.0, 1.0, 2.0], theta);
    let lopsided = lagrange([-2.0, -1.0, 0.0, 1.0], theta);

    for step in 1..grid.time.count {
        let t = grid.time.coord(step);
        for i in 1..n - 1 {
            let ii = i as isize;
            let reach = ii + 2 * dir;
            let (offs, w) = if reach >= 0 && (reach as usize) < n {
                ([-1isize, 0, 1, 2], centred)
            } else {
                ([-2isize, -1, 0, 1], lopsided)
            };
            let mut acc = 0.0;
            for k in 0..4 {
                acc += w[k] * u[(ii + offs[k] * dir) as usize];
            }
            next[i] = decay * acc;
        }
        next[0] = g1(t);
        next[n - 1] = g2(t);
        core::mem::swap(&mut u, &mut next);
        rec.record(step, t, &[&u]);
    }
    Ok(rec.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fdm::{presets, Axis};
    use crate::oracles::toy_exact;

    fn err_vs_exact(g: &FieldGrid) -> f64 {
        let mut s = 0.0;
        let mut n = 0;
        for (ti, &t) in g.times.iter().enumerate() {
            for i in 0..g.space[0].count {
                let d = g.at(0, ti, &[i]) - toy_exact(g.space[0].coord(i), t);
                s += d * d;
                n += 1;
            }
        }
        math::sqrt(s / n as f64)
    }

    #[test]
    fn accurate_on_preset_grid() {
        let g = solve_toy_fd(&presets::toy(), &ToyParams::default(), &Snapshots::Full).unwrap();
        assert_eq!(g.times.len(), 101);
        for i in 0..21 {
            assert_eq!(g.at(0, 0, &[i]), 6.0 * math::exp(-3.0 * g.space[0].coord(i)));
        }
        assert!(err_vs_exact(&g) <= 5e-3);
    }

    #[test]
    fn refinement_reduces_error() {
        let coarse = solve_toy_fd(&presets::toy(), &ToyParams::default(), &Snapshots::Full).unwrap();
        let fine_grid = Grid::new(vec![Axis::new(0.0, 0.05, 41)], Axis::new(0.0, 0.005, 201)).unwrap();
        let fine = solve_toy_fd(&fine_grid, &ToyParams::default(), &Snapshots::Full).unwrap();
        assert!(err_vs_exact(&fine) < err_vs_exact(&coarse));
    }

    #[test]
    fn refuses_large_steps() {
        let g = Grid::new(vec![Axis::new(0.0, 0.1, 21)], Axis::new(0.0, 0.25, 5)).unwrap();
        match solve_toy_fd(&g, &ToyParams::default(), &Snapshots::Full) {
            Err(FdError::Unstable { suggested_dt, .. }) => assert!((suggested_dt - 0.1).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }
}
