use alloc::vec;
use alloc::vec::Vec;

use super::{all_finite, FdError, FieldGrid, Grid, Recorder, Snapshots};
use crate::problems::{turing2_noise, Turing1Params, Turing2Params};

/// Solve a tridiagonal system. `sub[i]` multiplies x[i-1] in row i (sub[0]
/// unused); `sup[i]` multiplies x[i+1] (last entry unused).
pub fn thomas_solve(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>, FdError> {
    let n = diag.len();
    if sub.len() != n || sup.len() != n || rhs.len() != n || n == 0 {
        return Err(FdError::BadGrid("tridiagonal bands differ in length".into()));
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    if diag[0] == 0.0 {
        return Err(FdError::SingularSystem);
    }
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        if m == 0.0 {
            return Err(FdError::SingularSystem);
        }
        c[i] = if i + 1 < n { sup[i] / m } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Box pulse of height `s_b` on 1495 < x < 1505, no phagocytes.
pub fn solve_turing1_fd(grid: &Grid, p: &Turing1Params, snaps: &Snapshots) -> Result<FieldGrid, FdError> {
    grid.validate()?;
    let xa = grid.space[0];
    let b0: Vec<f64> = (0..xa.count)
        .map(|i| {
            let x = xa.coord(i);
            if 1495.0 < x && x < 1505.0 {
                p.s_b
            } else {
                0.0
            }
        })
        .collect();
    let c0 = vec![0.0; xa.count];
    solve_turing1_fd_with(grid, p, &b0, &c0, snaps)
}

/// Implicit diffusion, explicit reaction, zero-flux ends.
///
/// β is advanced first; γ's source uses the new β.
pub fn solve_turing1_fd_with(
    grid: &Grid,
    p: &Turing1Params,
    b0: &[f64],
    c0: &[f64],
    snaps: &Snapshots,
) -> Result<FieldGrid, FdError> {
    grid.validate()?;
    let n = grid.space[0].count;
    if grid.space.len() != 1 || b0.len() != n || c0.len() != n {
        return Err(FdError::BadGrid("Turing-1 needs a 1-D grid and matching starts".into()));
    }
    let dx = grid.space[0].step;
    let dt = grid.time.step;
    let kb = dt / (dx * dx) * p.d_b;
    let kc = dt / (dx * dx) * p.d_c;
    let f_e = p.f_e();

    let off_b = vec![-kb; n];
    let mut diag_b = vec![1.0 + 2.0 * kb; n];
    diag_b[0] = 1.0 + kb;
    diag_b[n - 1] = 1.0 + kb;
    let off_c = vec![-kc; n];
    let mut diag_c = vec![1.0 + 2.0 * kc + dt * p.r_c; n];
    diag_c[0] = 1.0 + kc + dt * p.r_c;
    diag_c[n - 1] = 1.0 + kc + dt * p.r_c;

    let mut b = b0.to_vec();
    let mut c = c0.to_vec();
    let mut rhs = vec![0.0; n];
    let mut rec = Recorder::new(grid, 2, snaps);
    rec.record(0, grid.time.coord(0), &[&b, &c]);
    for step in 1..grid.time.count {
        for i in 0..n {
            let sat = 1.0 - b[i] / p.b_i;
            rhs[i] =
                b[i] + dt * f_e * c[i] * sat + dt * p.r_b * sat * b[i] - dt * p.alpha * b[i] * c[i] / (p.s_b + b[i]);
        }
        b = thomas_solve(&off_b, &diag_b, &off_b, &rhs)?;
        for i in 0..n {
            rhs[i] = c[i] + dt * p.f_b * b[i];
        }
        c = thomas_solve(&off_c, &diag_c, &off_c, &rhs)?;
        if !all_finite(&b) || !all_finite(&c) {
            return Ok(rec.diverge(step, &grid.time));
        }
        rec.record(step, grid.time.coord(step), &[&b, &c]);
    }
    Ok(rec.finish())
}

/// Seeded noise start on the cell lattice.
pub fn solve_turing2_fd(grid: &Grid, p: &Turing2Params, seed: u64, snaps: &Snapshots) -> Result<FieldGrid, FdError> {
    grid.validate()?;
    if grid.space.len() != 2 {
        return Err(FdError::BadGrid("Turing-2 problem is 2-D".into()));
    }
    let (nx, ny) = (grid.space[0].count, grid.space[1].count);
    let mut u0 = Vec::with_capacity(nx * ny);
    let mut v0 = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let [a, b] = turing2_noise(seed, j, i);
            u0.push(a);
            v0.push(b);
        }
    }
    solve_turing2_fd_with(grid, p, &u0, &v0, snaps)
}

/// Explicit activator/inhibitor march with ghost-copy zero-flux edges.
pub fn solve_turing2_fd_with(
    grid: &Grid,
    p: &Turing2Params,
    u0: &[f64],
    v0: &[f64],
    snaps: &Snapshots,
) -> Result<FieldGrid, FdError> {
    grid.validate()?;
    let (xa, ya) = (grid.space[0], grid.space[1]);
    let (nx, ny) = (xa.count, ya.count);
    if u0.len() != nx * ny || v0.len() != nx * ny {
        return Err(FdError::BadGrid("start arrays do not match the grid".into()));
    }
    let dt = grid.time.step;
    let (ix2, iy2) = (1.0 / (xa.step * xa.step), 1.0 / (ya.step * ya.step));
    let dmax = p.a.max(p.b / p.tau);
    let bound = dmax * dt * (ix2 + iy2);
    if bound > 0.5 {
        return Err(FdError::Unstable {
            bound: "max(a, b/tau)·dt·(1/dx² + 1/dy²)",
            value: bound,
            limit: 0.5,
            suggested_dt: 0.5 / (dmax * (ix2 + iy2)),
        });
    }
    let mut u = u0.to_vec();
    let mut v = v0.to_vec();
    let mut un = u.clone();
    let mut vn = v.clone();
    let mut rec = Recorder::new(grid, 2, snaps);
    rec.record(0, grid.time.coord(0), &[&u, &v]);
    for step in 1..grid.time.count {
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let k = j * nx + i;
                let lu = (u[k - 1] + u[k + 1] - 2.0 * u[k]) * ix2 + (u[k - nx] + u[k + nx] - 2.0 * u[k]) * iy2;
                let lv = (v[k - 1] + v[k + 1] - 2.0 * v[k]) * ix2 + (v[k - nx] + v[k + nx] - 2.0 * v[k]) * iy2;
                let (uc, vc) = (u[k], v[k]);
                un[k] = uc + dt * (p.a * lu + uc - uc * uc * uc - vc + p.c);
                vn[k] = vc + dt * (p.b * lv + uc - vc) / p.tau;
            }
        }
        for z in [&mut un, &mut vn] {
            for i in 0..nx {
                z[i] = z[nx + i];
                z[(ny - 1) * nx + i] = z[(ny - 2) * nx + i];
            }
            for j in 0..ny {
                z[j * nx] = z[j * nx + 1];
                z[j * nx + nx - 1] = z[j * nx + nx - 2];
            }
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

/// Population standard deviation.
pub fn spatial_std(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    crate::math::sqrt(v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n)
}
