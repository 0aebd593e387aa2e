use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::ops::{Add, Div, Mul, Neg, Sub};

use super::{AdError, Scalar};
use crate::math;

const NO_PARENT: u32 = u32::MAX;

/// Kind of a recorded operation. Kept only for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Input,
    Const,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Affine,
    Exp,
    Tanh,
    Sigmoid,
    Relu,
    Powi,
    Recip,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    op: Op,
    parents: [u32; 2],
    partials: [f64; 2],
}

/// Append-only record of scalar operations.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

/// A value recorded on a [`Tape`].
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    idx: u32,
    value: f64,
}

impl core::fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "Var#{}({})", self.idx, self.value)
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Tape { nodes: RefCell::new(Vec::with_capacity(n)) }
    }

    /// Number of recorded nodes.
    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Forget every recorded node. Requires that no `Var` is alive.
    pub fn clear(&mut self) {
        self.nodes.get_mut().clear();
    }

    /// Record an independent variable.
    pub fn var(&self, value: f64) -> Var<'_> {
        self.push(Op::Input, [NO_PARENT; 2], [0.0; 2], value)
    }

    /// Record a constant (no gradient flows into it).
    pub fn constant(&self, value: f64) -> Var<'_> {
        self.push(Op::Const, [NO_PARENT; 2], [0.0; 2], value)
    }

    fn push(&self, op: Op, parents: [u32; 2], partials: [f64; 2], value: f64) -> Var<'_> {
        let mut nodes = self.nodes.borrow_mut();
        let idx = nodes.len() as u32;
        nodes.push(Node { op, parents, partials });
        Var { tape: self, idx, value }
    }

    /// Reverse sweep seeded with d(output)/d(output) = 1.
    pub fn gradient(&self, output: Var<'_>) -> Result<Adjoints, AdError> {
        if !core::ptr::eq(self, output.tape) {
            return Err(AdError::ForeignVariable);
        }
        let nodes = self.nodes.borrow();
        let out = output.idx as usize;
        let mut adj = vec![0.0f64; out + 1];
        adj[out] = 1.0;
        if !output.value.is_finite() {
            return Err(AdError::NonFinite { node: out, op: nodes[out].op });
        }
        for i in (0..=out).rev() {
            let a = adj[i];
            if a == 0.0 {
                continue;
            }
            let node = &nodes[i];
            if !a.is_finite() {
                return Err(AdError::NonFinite { node: i, op: node.op });
            }
            for k in 0..2 {
                let p = node.parents[k];
                if p != NO_PARENT {
                    let contrib = a * node.partials[k];
                    if !contrib.is_finite() {
                        return Err(AdError::NonFinite { node: i, op: node.op });
                    }
                    adj[p as usize] += contrib;
                }
            }
        }
        Ok(Adjoints { adj })
    }
}

/// Result of a reverse sweep.
#[derive(Debug, Clone)]
pub struct Adjoints {
    adj: Vec<f64>,
}

impl Adjoints {
    /// d(output)/d(v); zero for nodes recorded after the output.
    pub fn get(&self, v: &Var<'_>) -> f64 {
        self.at(v.idx as usize)
    }

    /// Adjoint of the node with index `idx`.
    pub fn at(&self, idx: usize) -> f64 {
        self.adj.get(idx).copied().unwrap_or(0.0)
    }
}

/// Gradient of `loss` with respect to each of `params`, in order.
pub fn param_gradient(tape: &Tape, loss: Var<'_>, params: &[Var<'_>]) -> Result<Vec<f64>, AdError> {
    if params.iter().any(|p| !core::ptr::eq(p.tape, tape)) {
        return Err(AdError::ForeignVariable);
    }
    let adj = tape.gradient(loss)?;
    Ok(params.iter().map(|p| adj.get(p)).collect())
}

impl<'t> Var<'t> {
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn index(&self) -> usize {
        self.idx as usize
    }

    pub fn tape(&self) -> &'t Tape {
        self.tape
    }

    #[inline]
    fn unary(self, op: Op, value: f64, d: f64) -> Self {
        self.tape.push(op, [self.idx, NO_PARENT], [d, 0.0], value)
    }

    #[inline]
    fn binary(self, rhs: Self, op: Op, value: f64, da: f64, db: f64) -> Self {
        debug_assert!(core::ptr::eq(self.tape, rhs.tape), "mixing tapes");
        self.tape.push(op, [self.idx, rhs.idx], [da, db], value)
    }

    /// `a * self + b` with constant `a`, `b`.
    #[inline]
    pub fn affine(self, a: f64, b: f64) -> Self {
        self.unary(Op::Affine, a * self.value + b, a)
    }
}

impl<'t> Add for Var<'t> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.binary(rhs, Op::Add, self.value + rhs.value, 1.0, 1.0)
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.binary(rhs, Op::Sub, self.value - rhs.value, 1.0, -1.0)
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.binary(rhs, Op::Mul, self.value * rhs.value, rhs.value, self.value)
    }
}

impl<'t> Div for Var<'t> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q = self.value / rhs.value;
        self.binary(rhs, Op::Div, q, 1.0 / rhs.value, -q / rhs.value)
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Self;
    fn neg(self) -> Self {
        self.unary(Op::Neg, -self.value, -1.0)
    }
}

impl<'t> Add<f64> for Var<'t> {
    type Output = Self;
    fn add(self, rhs: f64) -> Self {
        self.affine(1.0, rhs)
    }
}

impl<'t> Sub<f64> for Var<'t> {
    type Output = Self;
    fn sub(self, rhs: f64) -> Self {
        self.affine(1.0, -rhs)
    }
}

impl<'t> Mul<f64> for Var<'t> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.affine(rhs, 0.0)
    }
}

impl<'t> Div<f64> for Var<'t> {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        self.affine(1.0 / rhs, 0.0)
    }
}

impl<'t> Scalar for Var<'t> {
    fn value(&self) -> f64 {
        self.value
    }

    fn lift_const(&self, c: f64) -> Self {
        self.tape.constant(c)
    }

    fn exp(self) -> Self {
        let e = math::exp(self.value);
        self.unary(Op::Exp, e, e)
    }

    fn tanh(self) -> Self {
        let t = math::tanh(self.value);
        self.unary(Op::Tanh, t, 1.0 - t * t)
    }

    fn sigmoid(self) -> Self {
        let s = math::sigmoid(self.value);
        self.unary(Op::Sigmoid, s, s * (1.0 - s))
    }

    fn relu(self) -> Self {
        if self.value > 0.0 {
            self.unary(Op::Relu, self.value, 1.0)
        } else {
            self.unary(Op::Relu, 0.0, 0.0)
        }
    }

    fn powi(self, n: i32) -> Self {
        let d = if n == 0 { 0.0 } else { n as f64 * math::powi(self.value, n - 1) };
        self.unary(Op::Powi, math::powi(self.value, n), d)
    }

    fn recip(self) -> Self {
        let r = 1.0 / self.value;
        self.unary(Op::Recip, r, -r * r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_gradient() {
        let tape = Tape::new();
        let th = tape.var(3.0);
        let loss = th * th;
        let g = param_gradient(&tape, loss, &[th]).unwrap();
        assert_eq!(g, vec![6.0]);
    }

    #[test]
    fn shared_subexpression_accumulates() {
        let tape = Tape::new();
        let x = tape.var(2.0);
        let y = x.exp() * x + x.powi(3);
        let g = tape.gradient(y).unwrap().get(&x);
        let e = math::exp(2.0);
        assert!((g - (e * 2.0 + e + 12.0)).abs() < 1e-12);
    }

    #[test]
    fn nonfinite_reported() {
        let tape = Tape::new();
        let x = tape.var(0.0);
        let y = x.recip();
        assert!(matches!(tape.gradient(y), Err(AdError::NonFinite { .. })));
    }

    #[test]
    fn foreign_variable_rejected() {
        let t1 = Tape::new();
        let t2 = Tape::new();
        let a = t1.var(1.0);
        let b = t2.var(1.0);
        assert_eq!(param_gradient(&t1, a, &[b]).unwrap_err(), AdError::ForeignVariable);
    }
}
