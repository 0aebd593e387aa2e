use alloc::collections::VecDeque;
use alloc::vec::Vec;

use super::{check_grad, dot, OptimError};

const C1: f64 = 1e-4;
const C2: f64 = 0.9;
const MAX_TRIALS: usize = 40;

/// Limited-memory BFGS with a Wolfe line search.
#[derive(Debug, Clone)]
pub struct LbfgsState {
    pub memory: usize,
    history: VecDeque<(Vec<f64>, Vec<f64>)>,
    last: Option<(f64, Vec<f64>)>,
    pub iteration: u64,
    pub stalled: bool,
}

/// Outcome of one [`LbfgsState::step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LbfgsStep {
    Accepted {
        loss: f64,
        step: f64,
        evaluations: usize,
    },
    /// No step length met the Wolfe conditions; parameters are unchanged.
    Stalled {
        loss: f64,
        evaluations: usize,
    },
}

impl LbfgsState {
    pub fn new(memory: usize) -> Self {
        LbfgsState { memory: memory.max(1), history: VecDeque::new(), last: None, iteration: 0, stalled: false }
    }

    pub fn history_len(&self) -> usize {
        self.history.len()
    }

    /// Two-loop recursion: approximate −H·g.
    fn direction(&self, g: &[f64]) -> Vec<f64> {
        let mut q: Vec<f64> = g.to_vec();
        let mut alphas = Vec::with_capacity(self.history.len());
        for (s, y) in self.history.iter().rev() {
            let rho = 1.0 / dot(y, s);
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push((a, rho));
        }
        let gamma = match self.history.back() {
            Some((s, y)) => dot(s, y) / dot(y, y),
            None => 1.0,
        };
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
        for ((s, y), (a, rho)) in self.history.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        for qi in q.iter_mut() {
            *qi = -*qi;
        }
        q
    }

    /// One iteration. `f` returns loss and gradient at a candidate point.
    pub fn step<E, F>(&mut self, params: &mut [f64], mut f: F) -> Result<LbfgsStep, E>
    where
        E: From<OptimError>,
        F: FnMut(&[f64]) -> Result<(f64, Vec<f64>), E>,
    {
        let mut evaluations = 0;
        let (f0, g0) = match self.last.take() {
            Some(v) => v,
            None => {
                evaluations += 1;
                let (l, g) = f(params)?;
                check_grad(params, &g)?;
                (l, g)
            }
        };
        let mut d = self.direction(&g0);
        let mut slope = dot(&g0, &d);
        if !(slope < 0.0) {
            self.history.clear();
            d = g0.iter().map(|g| -g).collect();
            slope = -dot(&g0, &g0);
        }
        if slope == 0.0 {
            self.last = Some((f0, g0));
            self.stalled = true;
            return Ok(LbfgsStep::Stalled { loss: f0, evaluations });
        }

        let (mut lo, mut hi) = (0.0, f64::INFINITY);
        let mut alpha = 1.0;
        let mut trial = params.to_vec();
        for _ in 0..MAX_TRIALS {
            for ((t, p), di) in trial.iter_mut().zip(params.iter()).zip(&d) {
                *t = p + alpha * di;
            }
            evaluations += 1;
            let (fa, ga) = f(&trial)?;
            let finite = fa.is_finite() && ga.iter().all(|g| g.is_finite());
            if !finite || fa > f0 + C1 * alpha * slope {
                hi = alpha;
                alpha = 0.5 * (lo + hi);
                continue;
            }
            if dot(&ga, &d) < C2 * slope {
                lo = alpha;
                alpha = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * alpha };
                continue;
            }
            let s: Vec<f64> = d.iter().map(|di| alpha * di).collect();
            let y: Vec<f64> = ga.iter().zip(&g0).map(|(a, b)| a - b).collect();
            if dot(&s, &y) > 0.0 {
                if self.history.len() == self.memory {
                    self.history.pop_front();
                }
                self.history.push_back((s, y));
            }
            params.copy_from_slice(&trial);
            self.last = Some((fa, ga));
            self.iteration += 1;
            self.stalled = false;
            return Ok(LbfgsStep::Accepted { loss: fa, step: alpha, evaluations });
        }
        self.last = Some((f0, g0));
        self.stalled = true;
        Ok(LbfgsStep::Stalled { loss: f0, evaluations })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn quad(diag: &[f64]) -> impl Fn(&[f64]) -> Result<(f64, Vec<f64>), OptimError> + '_ {
        move |x: &[f64]| {
            let l = 0.5 * x.iter().zip(diag).map(|(xi, a)| a * xi * xi).sum::<f64>();
            Ok((l, x.iter().zip(diag).map(|(xi, a)| a * xi).collect()))
        }
    }

    #[test]
    fn newton_step_on_unit_quadratic() {
        let mut s = LbfgsState::new(10);
        let mut x = [1.0];
        let r = s.step(&mut x, quad(&[1.0])).unwrap();
        assert!(matches!(r, LbfgsStep::Accepted { step, .. } if step == 1.0));
        assert_eq!(x, [0.0]);
    }

    #[test]
    fn empty_history_is_steepest_descent() {
        let s = LbfgsState::new(5);
        assert_eq!(s.direction(&[2.0, -3.0]), vec![-2.0, 3.0]);
    }

    #[test]
    fn anisotropic_quadratic_converges() {
        let mut s = LbfgsState::new(10);
        let mut x = [1.0, 1.0];
        let f = quad(&[1.0, 10.0]);
        let mut prev = f(&x).unwrap().0;
        let mut done = false;
        for _ in 0..20 {
            match s.step(&mut x, &f).unwrap() {
                LbfgsStep::Accepted { loss, .. } => {
                    assert!(loss < prev);
                    prev = loss;
                }
                LbfgsStep::Stalled { .. } => break,
            }
            if prev <= 1e-10 {
                done = true;
                break;
            }
        }
        assert!(done, "f = {prev}");
    }

    #[test]
    fn stalls_on_nan_landscape() {
        let mut s = LbfgsState::new(3);
        let mut x = [1.0];
        let mut first = true;
        let f = |x: &[f64]| -> Result<(f64, Vec<f64>), OptimError> {
            if first {
                first = false;
                Ok((x[0], vec![1.0]))
            } else {
                Ok((f64::NAN, vec![1.0]))
            }
        };
        let r = s.step(&mut x, f).unwrap();
        assert!(matches!(r, LbfgsStep::Stalled { .. }));
        assert!(s.stalled);
        assert_eq!(x, [1.0]);
    }

    proptest! {
        #[test]
        fn monotone_on_convex_quadratics(
            diag in proptest::collection::vec(0.1f64..50.0, 1..=5),
            x0 in proptest::collection::vec(-5.0f64..5.0, 5),
        ) {
            let n = diag.len();
            let mut x = x0[..n].to_vec();
            let f = quad(&diag);
            let mut s = LbfgsState::new(10);
            let mut prev = f(&x).unwrap().0;
            for _ in 0..30 {
                match s.step(&mut x, &f).unwrap() {
                    LbfgsStep::Accepted { loss, .. } => {
                        prop_assert!(loss <= prev);
                        prev = loss;
                    }
                    LbfgsStep::Stalled { .. } => break,
                }
                prop_assert!(s.history_len() <= 10);
            }
        }
    }
}
