//! Finite-difference checks of network derivatives.
//!
//! Input derivatives use central differences with one Richardson step;
//! parameter gradients use plain central differences.

use alloc::vec::Vec;

use super::{forward, MlpConfig, NetworkError};
use crate::autodiff::{param_gradient, Jet, Tape, Var};
use crate::math;

/// Relative error with a floor so that near-zero derivatives compare absolutely.
pub fn rel_err(got: f64, want: f64) -> f64 {
    math::abs(got - want) / math::abs(got).max(math::abs(want)).max(1e-2)
}

fn value_along(
    config: &MlpConfig,
    params: &[f64],
    x: &[f64],
    axis: usize,
    out: usize,
    s: f64,
) -> Result<f64, NetworkError> {
    let xs: Vec<Jet<f64>> =
        x.iter().enumerate().map(|(i, &v)| Jet::constant(if i == axis { v + s } else { v }, 0).unwrap()).collect();
    Ok(forward(config, params, &xs)?[out].value())
}

/// Central estimates of the first three derivatives with step `h`.
fn central(f: &dyn Fn(f64) -> f64, h: f64) -> [f64; 3] {
    let (f0, p1, m1, p2, m2) = (f(0.0), f(h), f(-h), f(2.0 * h), f(-2.0 * h));
    [(p1 - m1) / (2.0 * h), (p1 - 2.0 * f0 + m1) / (h * h), (p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * h * h * h)]
}

/// Jet derivatives of orders 1..=3 along `axis` next to their Richardson
/// finite-difference estimates (step `h` and `h/2`).
pub fn input_derivatives(
    config: &MlpConfig,
    params: &[f64],
    x: &[f64],
    axis: usize,
    out: usize,
    h: f64,
) -> Result<[(f64, f64); 3], NetworkError> {
    let xs: Vec<Jet<f64>> = x.iter().enumerate().map(|(i, &v)| Jet::lift(v, i == axis, 3).unwrap()).collect();
    let y = forward(config, params, &xs)?;
    let f = |s: f64| value_along(config, params, x, axis, out, s).unwrap_or(f64::NAN);
    let (a, b) = (central(&f, h), central(&f, 0.5 * h));
    let mut res = [(0.0, 0.0); 3];
    for k in 0..3 {
        res[k] = (y[out].deriv(k + 1), (4.0 * b[k] - a[k]) / 3.0);
    }
    Ok(res)
}

/// Loss mixing values and first derivatives along axis 0: Σ (u² + u_x²).
fn probe_loss<'t>(tape: &'t Tape, config: &MlpConfig, params: &[Var<'t>], x: &[f64]) -> Result<Var<'t>, NetworkError> {
    let xs: Vec<Jet<Var>> =
        x.iter().enumerate().map(|(i, &v)| Jet::lift(tape.constant(v), i == 0, 1).unwrap()).collect();
    let mut loss = tape.constant(0.0);
    for y in forward(config, params, &xs)? {
        let (u, ux) = (y.value(), y.deriv(1));
        loss = loss + u * u + ux * ux;
    }
    Ok(loss)
}

fn probe_value(config: &MlpConfig, params: &[f64], x: &[f64]) -> Result<f64, NetworkError> {
    let tape = Tape::new();
    let p: Vec<Var> = params.iter().map(|&v| tape.var(v)).collect();
    Ok(probe_loss(&tape, config, &p, x)?.value())
}

/// Reverse-mode gradient of the probe loss next to central differences in
/// each parameter (step `h`).
pub fn param_gradients(config: &MlpConfig, params: &[f64], x: &[f64], h: f64) -> Result<Vec<(f64, f64)>, NetworkError> {
    let tape = Tape::new();
    let p: Vec<Var> = params.iter().map(|&v| tape.var(v)).collect();
    let loss = probe_loss(&tape, config, &p, x)?;
    let g = param_gradient(&tape, loss, &p).expect("finite probe loss");
    let mut work = params.to_vec();
    let mut out = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        work[i] = params[i] + h;
        let up = probe_value(config, &work, x)?;
        work[i] = params[i] - h;
        let down = probe_value(config, &work, x)?;
        work[i] = params[i];
        out.push((g[i], (up - down) / (2.0 * h)));
    }
    Ok(out)
}
