//! Pointwise PDE residuals, generic over the scalar type.

use crate::autodiff::Scalar;

use super::{KdvParams, Turing1Params, Turing2Params};

/// A field value and its partial derivatives along each input axis.
///
/// `d[axis][k - 1]` is the k-th derivative along `axis`.
#[derive(Debug, Clone, Copy)]
pub struct FieldDerivs<S> {
    pub value: S,
    pub d: [[S; 3]; 3],
}

impl<S: Scalar> FieldDerivs<S> {
    /// Value only; all derivatives zero.
    pub fn constant(value: S) -> Self {
        let z = value.zero_like();
        FieldDerivs { value, d: [[z; 3]; 3] }
    }

    #[inline]
    pub fn get(&self, axis: usize, k: usize) -> S {
        if k == 0 {
            self.value
        } else {
            self.d[axis][k - 1]
        }
    }

    #[inline]
    pub fn set(&mut self, axis: usize, k: usize, v: S) {
        if k == 0 {
            self.value = v;
        } else {
            self.d[axis][k - 1] = v;
        }
    }
}

/// One or two residual values.
#[derive(Debug, Clone, Copy)]
pub struct Residual<S> {
    values: [S; 2],
    len: usize,
}

impl<S: Copy> Residual<S> {
    pub fn one(f: S) -> Self {
        Residual { values: [f, f], len: 1 }
    }

    pub fn two(f: S, g: S) -> Self {
        Residual { values: [f, g], len: 2 }
    }

    pub fn as_slice(&self) -> &[S] {
        &self.values[..self.len]
    }
}

/// `u_x − 2u_t − u` for the preset coefficients; generally `a·u_x + b·u_t + c·u`.
pub fn residual_toy<S: Scalar>(u: S, u_x: S, u_t: S) -> S {
    residual_toy_with(u, u_x, u_t, 1.0, -2.0, -1.0)
}

pub fn residual_toy_with<S: Scalar>(u: S, u_x: S, u_t: S, a: f64, b: f64, c: f64) -> S {
    u_x * a + u_t * b + u * c
}

pub fn residual_burgers<S: Scalar>(u: S, u_x: S, u_t: S, u_xx: S, nu: f64) -> S {
    u_t + u * u_x - u_xx * nu
}

pub fn residual_heat2d<S: Scalar>(u_t: S, u_xx: S, u_yy: S, alpha: f64) -> S {
    u_t - (u_xx + u_yy) * alpha
}

/// Coupled KdV pair. Derivative arguments are `[·, ·_x, ·_t, ·_xxx]` per field.
pub fn residual_kdv<S: Scalar>(u: [S; 4], v: [S; 4], p: &KdvParams) -> (S, S) {
    let [u0, ux, ut, uxxx] = u;
    let [v0, vx, vt, vxxx] = v;
    let f = ut - u0 * ux * (6.0 * p.a) - v0 * vx * (2.0 * p.b) - uxxx * p.a;
    let g = vt + u0 * vx * 3.0 + vxxx;
    (f, g)
}

pub fn residual_fisher<S: Scalar>(u: S, u_t: S, u_xx: S, d: f64, r: f64) -> S {
    u_t - u_xx * d - u * (u * -1.0 + 1.0) * r
}

/// Bacteria/phagocyte system. `lap_*` is the spatial Laplacian.
pub fn residual_turing1<S: Scalar>(
    beta: S,
    beta_t: S,
    lap_beta: S,
    gamma: S,
    gamma_t: S,
    lap_gamma: S,
    p: &Turing1Params,
) -> Result<(S, S), super::ProblemError> {
    let denom = beta + p.s_b;
    if denom.value() == 0.0 {
        return Err(super::ProblemError::Singular("s_b + β = 0"));
    }
    let sat = beta * (-1.0 / p.b_i) + 1.0;
    let f = beta_t - lap_beta * p.d_b - sat * beta * p.r_b + beta * gamma * p.alpha / denom - sat * gamma * p.f_e();
    let g = gamma_t - lap_gamma * p.d_c - beta * p.f_b + gamma * p.r_c;
    Ok((f, g))
}

/// Activator/inhibitor system with cubic self-limitation.
pub fn residual_turing2<S: Scalar>(u: S, u_t: S, lap_u: S, v: S, v_t: S, lap_v: S, p: &Turing2Params) -> (S, S) {
    let f = u_t - lap_u * p.a - u + u * u * u + v - p.c;
    let g = v_t - (lap_v * p.b + u - v) / p.tau;
    (f, g)
}

pub fn residual_exp_ode<S: Scalar>(z: S, z_s: S, alpha: f64) -> S {
    z_s - z * alpha
}
