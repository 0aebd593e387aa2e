use alloc::vec;
use alloc::vec::Vec;

use super::{check_grad, OptimError};
use crate::math;

/// Adam moments and hyper-parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub lr: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(n: usize, lr: f64) -> Self {
        Self::with_params(n, lr, 0.9, 0.999, 1e-8)
    }

    pub fn with_params(n: usize, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        AdamState { m: vec![0.0; n], v: vec![0.0; n], t: 0, beta1, beta2, lr, eps }
    }

    /// One bias-corrected update of `params` in place.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) -> Result<(), OptimError> {
        check_grad(params, grad)?;
        if self.m.len() != params.len() {
            return Err(OptimError::Length { params: params.len(), grad: self.m.len() });
        }
        self.t += 1;
        let c1 = 1.0 - math::powi(self.beta1, self.t.min(i32::MAX as u64) as i32);
        let c2 = 1.0 - math::powi(self.beta2, self.t.min(i32::MAX as u64) as i32);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] -= self.lr * mh / (math::sqrt(vh) + self.eps);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn first_step_by_hand() {
        let mut s = AdamState::new(1, 1e-3);
        let mut th = [0.0];
        s.step(&mut th, &[1.0]).unwrap();
        assert!((s.m[0] - 0.1).abs() < 1e-15);
        assert!((s.v[0] - 0.001).abs() < 1e-15);
        assert!((th[0] + 0.001).abs() < 1e-10);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn zero_gradient_never_moves() {
        let mut s = AdamState::new(3, 0.1);
        let mut th = [1.0, -2.0, 3.0];
        for _ in 0..50 {
            s.step(&mut th, &[0.0; 3]).unwrap();
        }
        assert_eq!(th, [1.0, -2.0, 3.0]);
    }

    #[test]
    fn rejects_bad_gradients() {
        let mut s = AdamState::new(2, 0.1);
        let mut th = [0.0; 2];
        assert!(matches!(s.step(&mut th, &[0.0, f64::NAN]), Err(OptimError::NonFiniteGradient { index: 1, .. })));
        assert!(matches!(s.step(&mut th, &[0.0]), Err(OptimError::Length { .. })));
    }

    proptest! {
        #[test]
        fn deterministic_and_bounded(g in proptest::collection::vec(-1e3f64..1e3, 1..8), steps in 1usize..20) {
            let n = g.len();
            let mut a = AdamState::new(n, 1e-3);
            let mut b = a.clone();
            let mut pa = vec![0.5; n];
            let mut pb = pa.clone();
            for _ in 0..steps {
                let before = pa.clone();
                a.step(&mut pa, &g).unwrap();
                b.step(&mut pb, &g).unwrap();
                for (x, y) in pa.iter().zip(&before) {
                    prop_assert!((x - y).abs() <= 10.0 * 1e-3);
                }
            }
            prop_assert_eq!(pa, pb);
            prop_assert!(a.v.iter().all(|v| *v >= 0.0));
        }
    }
}
