use core::ops::{Add, Mul, Neg, Sub};

use super::{AdError, Scalar};

/// Highest derivative order a jet tracks.
pub const MAX_ORDER: usize = 3;

/// Truncated Taylor jet in one active input variable.
///
/// `c[k]` is the k-th derivative (not the Taylor coefficient) of the carried
/// quantity. Slots above `order` are zero and ignored.
#[derive(Clone, Copy, Debug)]
pub struct Jet<S> {
    order: u8,
    c: [S; 4],
}

/// Elementary operations accepted by [`Jet::apply`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Elementary {
    Add,
    Sub,
    Mul,
    Div,
    Exp,
    Tanh,
    Sigmoid,
    Relu,
    Power(i32),
}

impl<S: Scalar> Jet<S> {
    /// Jet of an input coordinate: active inputs have first derivative one.
    pub fn lift(x: S, active: bool, order: usize) -> Result<Self, AdError> {
        if order > MAX_ORDER {
            return Err(AdError::OrderTooHigh { requested: order });
        }
        let z = x.zero_like();
        let mut c = [x, z, z, z];
        if active && order >= 1 {
            c[1] = x.lift_const(1.0);
        }
        Ok(Jet { order: order as u8, c })
    }

    /// Jet of a quantity that does not depend on the active input.
    pub fn constant(x: S, order: usize) -> Result<Self, AdError> {
        Self::lift(x, false, order)
    }

    /// Build from explicit derivatives `[d0, d1, d2, d3]`.
    pub fn from_derivs(c: [S; 4], order: usize) -> Result<Self, AdError> {
        if order > MAX_ORDER {
            return Err(AdError::OrderTooHigh { requested: order });
        }
        Ok(Jet { order: order as u8, c })
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn value(&self) -> S {
        self.c[0]
    }

    /// k-th derivative; zero beyond the tracked order.
    pub fn deriv(&self, k: usize) -> S {
        if k <= self.order as usize {
            self.c[k]
        } else {
            self.c[0].zero_like()
        }
    }

    /// Multiply every coefficient by a scalar.
    pub fn scale(&self, s: S) -> Self {
        let mut c = self.c;
        for ck in c.iter_mut().take(self.order as usize + 1) {
            *ck = *ck * s;
        }
        Jet { order: self.order, c }
    }

    /// Add a scalar to the value.
    pub fn shift(&self, s: S) -> Self {
        let mut c = self.c;
        c[0] = c[0] + s;
        Jet { order: self.order, c }
    }

    /// Chain rule through an outer function given its derivatives
    /// `phi[k]` = φ⁽ᵏ⁾ evaluated at the current value.
    pub fn compose(&self, phi: [S; 4]) -> Self {
        let f = &self.c;
        let mut c = self.c;
        c[0] = phi[0];
        let n = self.order;
        if n >= 1 {
            c[1] = phi[1] * f[1];
        }
        if n >= 2 {
            c[2] = phi[2] * f[1] * f[1] + phi[1] * f[2];
        }
        if n >= 3 {
            c[3] = phi[3] * f[1] * f[1] * f[1] + phi[2] * f[1] * f[2] * 3.0 + phi[1] * f[3];
        }
        Jet { order: n, c }
    }

    pub fn exp(&self) -> Self {
        let e = self.c[0].exp();
        self.compose([e, e, e, e])
    }

    pub fn tanh(&self) -> Self {
        let t = self.c[0].tanh();
        let s = (t * t - 1.0) * -1.0;
        let d2 = t * s * -2.0;
        let d3 = s * (t * t * 6.0 - 2.0);
        self.compose([t, s, d2, d3])
    }

    pub fn sigmoid(&self) -> Self {
        let sg = self.c[0].sigmoid();
        let p = sg * (sg * -1.0 + 1.0);
        let d2 = p * (sg * -2.0 + 1.0);
        let d3 = p * (sg * sg * 6.0 - sg * 6.0 + 1.0);
        self.compose([sg, p, d2, d3])
    }

    /// Rectifier. The kink is treated as flat: higher derivatives are zero.
    pub fn relu(&self) -> Self {
        let v = self.c[0];
        let z = v.zero_like();
        let one = if v.value() > 0.0 { v.lift_const(1.0) } else { z };
        self.compose([v.relu(), one, z, z])
    }

    pub fn powi(&self, n: i32) -> Self {
        let v = self.c[0];
        let nf = n as f64;
        let z = v.zero_like();
        let term = |k: i32, coef: f64| if coef == 0.0 { z } else { v.powi(n - k) * coef };
        self.compose([v.powi(n), term(1, nf), term(2, nf * (nf - 1.0)), term(3, nf * (nf - 1.0) * (nf - 2.0))])
    }

    pub fn recip(&self) -> Result<Self, AdError> {
        let v = self.c[0];
        if v.value() == 0.0 {
            return Err(AdError::DivisionByZero);
        }
        let r = v.recip();
        let r2 = r * r;
        Ok(self.compose([r, -r2, r2 * r * 2.0, r2 * r2 * -6.0]))
    }

    pub fn try_div(&self, rhs: &Self) -> Result<Self, AdError> {
        Ok(*self * rhs.recip()?)
    }

    /// Apply an elementary operation to jets of equal order.
    pub fn apply(op: Elementary, args: &[Self]) -> Result<Self, AdError> {
        let binary = matches!(op, Elementary::Add | Elementary::Sub | Elementary::Mul | Elementary::Div);
        let expected = if binary { 2 } else { 1 };
        if args.len() != expected {
            return Err(AdError::Arity { expected, got: args.len() });
        }
        if binary && args[0].order != args[1].order {
            return Err(AdError::OrderMismatch { left: args[0].order as usize, right: args[1].order as usize });
        }
        let a = args[0];
        Ok(match op {
            Elementary::Add => a + args[1],
            Elementary::Sub => a - args[1],
            Elementary::Mul => a * args[1],
            Elementary::Div => a.try_div(&args[1])?,
            Elementary::Exp => a.exp(),
            Elementary::Tanh => a.tanh(),
            Elementary::Sigmoid => a.sigmoid(),
            Elementary::Relu => a.relu(),
            Elementary::Power(n) => a.powi(n),
        })
    }
}

impl<S: Scalar> Add for Jet<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let order = self.order.max(rhs.order);
        let mut c = self.c;
        for k in 0..=order as usize {
            c[k] = self.c[k] + rhs.c[k];
        }
        Jet { order, c }
    }
}

impl<S: Scalar> Sub for Jet<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let order = self.order.max(rhs.order);
        let mut c = self.c;
        for k in 0..=order as usize {
            c[k] = self.c[k] - rhs.c[k];
        }
        Jet { order, c }
    }
}

impl<S: Scalar> Neg for Jet<S> {
    type Output = Self;
    fn neg(self) -> Self {
        let mut c = self.c;
        for ck in c.iter_mut().take(self.order as usize + 1) {
            *ck = -*ck;
        }
        Jet { order: self.order, c }
    }
}

impl<S: Scalar> Mul for Jet<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let a = &self.c;
        let b = &rhs.c;
        let order = self.order.max(rhs.order);
        let mut c = self.c;
        c[0] = a[0] * b[0];
        if order >= 1 {
            c[1] = a[1] * b[0] + a[0] * b[1];
        }
        if order >= 2 {
            c[2] = a[2] * b[0] + a[1] * b[1] * 2.0 + a[0] * b[2];
        }
        if order >= 3 {
            c[3] = a[3] * b[0] + (a[2] * b[1] + a[1] * b[2]) * 3.0 + a[0] * b[3];
        }
        Jet { order, c }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::Tape;

    fn input(x: f64) -> Jet<f64> {
        Jet::lift(x, true, 3).unwrap()
    }

    #[test]
    fn lift_input() {
        let j = input(2.0);
        assert_eq!([j.deriv(0), j.deriv(1), j.deriv(2), j.deriv(3)], [2.0, 1.0, 0.0, 0.0]);
        assert!(Jet::lift(1.0, true, 4).is_err());
    }

    #[test]
    fn cube_third_derivative() {
        let x = input(1.7);
        let y = x * x * x;
        assert!((y.deriv(3) - 6.0).abs() < 1e-14);
        assert!((x.powi(3).deriv(3) - 6.0).abs() < 1e-14);
    }

    #[test]
    fn activations_at_zero() {
        let s = input(0.0).sigmoid();
        assert!((s.deriv(1) - 0.25).abs() < 1e-15);
        assert!(s.deriv(2).abs() < 1e-15);
        assert!((s.deriv(3) + 0.125).abs() < 1e-15);
        let t = input(0.0).tanh();
        assert_eq!(t.deriv(2), 0.0);
        assert!((t.deriv(3) + 2.0).abs() < 1e-15);
    }

    #[test]
    fn division_by_zero() {
        let z = Jet::constant(0.0, 2).unwrap();
        assert_eq!(input(1.0).try_div(&z).unwrap_err(), AdError::DivisionByZero);
    }

    #[test]
    fn apply_checks_orders() {
        let a = Jet::lift(1.0, true, 2).unwrap();
        let b = Jet::lift(1.0, true, 3).unwrap();
        assert!(matches!(Jet::apply(Elementary::Mul, &[a, b]), Err(AdError::OrderMismatch { .. })));
        assert!(matches!(Jet::apply(Elementary::Exp, &[a, b]), Err(AdError::Arity { .. })));
        let e = Jet::apply(Elementary::Exp, &[a]).unwrap();
        assert!((e.deriv(2) - core::f64::consts::E).abs() < 1e-14);
    }

    #[test]
    fn quotient_rule() {
        let x = input(0.8);
        let q = x.exp().try_div(&(x * x + Jet::constant(1.0, 3).unwrap())).unwrap();
        // f = e^x / (1 + x²); compare with a central difference of the second derivative.
        let f = |x: f64| crate::math::exp(x) / (1.0 + x * x);
        let h = 1e-4;
        let d2 = (f(0.8 + h) - 2.0 * f(0.8) + f(0.8 - h)) / (h * h);
        assert!((q.deriv(2) - d2).abs() < 1e-6);
    }

    #[test]
    fn gradient_of_squared_derivative() {
        // L(θ) = (d/dx tanh(θ x))² at x = 0.3; check dL/dθ numerically.
        let x0 = 0.3;
        let loss_at = |th: f64| {
            let x = Jet::lift(x0, true, 1).unwrap();
            let u = x.scale(th).tanh();
            u.deriv(1) * u.deriv(1)
        };
        let tape = Tape::new();
        let th = tape.var(1.3);
        let x = Jet::lift(tape.constant(x0), true, 1).unwrap();
        let u = x.scale(th).tanh();
        let l = u.deriv(1) * u.deriv(1);
        let g = tape.gradient(l).unwrap().get(&th);
        let h = 1e-6;
        let fd = (loss_at(1.3 + h) - loss_at(1.3 - h)) / (2.0 * h);
        assert!((g - fd).abs() < 1e-5, "{g} vs {fd}");
    }
}
