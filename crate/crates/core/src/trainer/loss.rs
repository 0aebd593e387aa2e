//! The composite loss: initial data, face data and PDE residual.

use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;

use super::TrainError;
use crate::autodiff::{Jet, Tape, Var};
use crate::network::{forward, BatchPass, ChannelSpec, MlpConfig};
use crate::problems::{Condition, FieldDerivs, PdeProblem};
use crate::sampling::CollocationSet;

/// Multipliers on the three loss terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub initial: f64,
    pub boundary: f64,
    pub residual: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights { initial: 1.0, boundary: 1.0, residual: 1.0 }
    }
}

/// Mean-square terms before weighting, and their weighted total.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossTerms {
    pub initial: f64,
    pub boundary: f64,
    pub residual: f64,
    pub total: f64,
}

impl LossTerms {
    fn weighted(initial: f64, boundary: f64, residual: f64, w: &LossWeights) -> Self {
        let total = w.initial * initial + w.boundary * boundary + w.residual * residual;
        LossTerms { initial, boundary, residual, total }
    }

    /// Initial plus boundary term.
    pub fn data(&self) -> f64 {
        self.initial + self.boundary
    }

    pub fn is_finite(&self) -> bool {
        self.total.is_finite()
    }
}

fn check_sizes(problem: &PdeProblem, net: &MlpConfig, set: &CollocationSet) -> Result<(), TrainError> {
    if net.input_dim != problem.input_dim() || net.output_dim != problem.fields() || set.dim != net.input_dim {
        return Err(TrainError::Config("network shape does not fit the problem".into()));
    }
    if set.initial.is_empty() || set.interior_len() == 0 {
        return Err(TrainError::Config("empty initial or interior point set".into()));
    }
    if set.boundary.is_empty() && !problem.faces().is_empty() {
        return Err(TrainError::Config("empty boundary point set".into()));
    }
    Ok(())
}

/// Batched loss and gradient for a fixed collocation set.
///
/// Points are grouped by what the loss reads from the network: plain values
/// (initial and Dirichlet data), first derivatives along a face normal
/// (Neumann data), and the full residual stencil (interior).
pub struct LossEvaluator<'a> {
    problem: &'a PdeProblem,
    weights: LossWeights,
    fields: usize,
    /// Value-data points: coordinates, targets, and whether each is initial.
    value_pts: Vec<f64>,
    value_targets: Vec<[f64; 2]>,
    value_initial: Vec<bool>,
    n_initial: usize,
    n_boundary: usize,
    flux_pts: Vec<f64>,
    flux_targets: Vec<[f64; 2]>,
    flux_axis: Vec<usize>,
    flux_spec: ChannelSpec,
    interior: Vec<f64>,
    n_interior: usize,
    interior_spec: ChannelSpec,
    /// Reused passes for the value, flux and interior groups.
    passes: RefCell<[BatchPass; 3]>,
    adj: RefCell<Vec<f64>>,
}

impl<'a> LossEvaluator<'a> {
    pub fn new(
        problem: &'a PdeProblem,
        net: &MlpConfig,
        set: &CollocationSet,
        weights: LossWeights,
    ) -> Result<Self, TrainError> {
        check_sizes(problem, net, set)?;
        let dim = set.dim;
        let mut flux_orders = vec![1; dim];
        flux_orders[problem.time_axis()] = 0;
        let flux_spec = ChannelSpec::new(&flux_orders)?;
        let interior_spec = ChannelSpec::new(&problem.deriv_orders())?;
        let mut ev = LossEvaluator {
            problem,
            weights,
            fields: problem.fields(),
            value_pts: Vec::new(),
            value_targets: Vec::new(),
            value_initial: Vec::new(),
            n_initial: set.initial.len(),
            n_boundary: set.boundary.len(),
            flux_pts: Vec::new(),
            flux_targets: Vec::new(),
            flux_axis: Vec::new(),
            flux_spec,
            interior: set.interior.clone(),
            n_interior: set.interior_len(),
            interior_spec,
            passes: RefCell::new([
                BatchPass::new(net, ChannelSpec::values(dim)),
                BatchPass::new(net, flux_spec),
                BatchPass::new(net, interior_spec),
            ]),
            adj: RefCell::new(Vec::new()),
        };
        for d in set.initial.iter().chain(&set.boundary) {
            match d.cond {
                Condition::Initial(v) | Condition::Dirichlet(_, v) => {
                    ev.value_pts.extend_from_slice(&d.point[..dim]);
                    ev.value_targets.push(v);
                    ev.value_initial.push(matches!(d.cond, Condition::Initial(_)));
                }
                Condition::Neumann(face, v) => {
                    ev.flux_pts.extend_from_slice(&d.point[..dim]);
                    ev.flux_targets.push(v);
                    ev.flux_axis.push(face.axis);
                }
            }
        }
        Ok(ev)
    }

    fn scale(&self, initial: bool) -> f64 {
        if initial {
            self.weights.initial / self.n_initial as f64
        } else {
            self.weights.boundary / self.n_boundary as f64
        }
    }

    /// Loss terms and, if `grad` is given, accumulate the gradient into it.
    pub fn evaluate(&self, params: &[f64], mut grad: Option<&mut [f64]>) -> Result<LossTerms, TrainError> {
        let m = self.fields;
        let (mut l0, mut lb, mut lf) = (0.0, 0.0, 0.0);
        let mut passes = self.passes.borrow_mut();
        let [value_pass, flux_pass, pass] = &mut *passes;
        let mut adj = self.adj.borrow_mut();

        if !self.value_targets.is_empty() {
            let pass = &mut *value_pass;
            pass.run(params, &self.value_pts)?;
            adj.clear();
            adj.resize(self.value_targets.len() * m, 0.0);
            for (p, (t, &init)) in self.value_targets.iter().zip(&self.value_initial).enumerate() {
                let s = self.scale(init);
                let mut sq = 0.0;
                for f in 0..m {
                    let e = pass.output(0, p, f) - t[f];
                    sq += e * e;
                    adj[p * m + f] = 2.0 * s * e;
                }
                if init {
                    l0 += sq;
                } else {
                    lb += sq;
                }
            }
            if let Some(g) = grad.as_deref_mut() {
                pass.backward(params, &adj, g);
            }
        }

        if !self.flux_targets.is_empty() {
            let spec = self.flux_spec;
            let pass = &mut *flux_pass;
            pass.run(params, &self.flux_pts)?;
            let n = self.flux_targets.len();
            adj.clear();
            adj.resize(spec.count() * n * m, 0.0);
            let s = self.scale(false);
            for (p, (t, &axis)) in self.flux_targets.iter().zip(&self.flux_axis).enumerate() {
                let c = spec.channel(axis, 1).expect("face axis carries a first derivative");
                for f in 0..m {
                    let e = pass.output(c, p, f) - t[f];
                    lb += e * e;
                    adj[(c * n + p) * m + f] = 2.0 * s * e;
                }
            }
            if let Some(g) = grad.as_deref_mut() {
                pass.backward(params, &adj, g);
            }
        }

        let spec = self.interior_spec;
        pass.run(params, &self.interior)?;
        let n = self.n_interior;
        let channels = spec.count();
        adj.clear();
        adj.resize(channels * n * m, 0.0);
        let s = self.weights.residual / n as f64;
        let mut tape = Tape::with_capacity(64);
        for p in 0..n {
            tape.clear();
            let mut ids = [[0usize; 2]; 10];
            let mut q: Vec<FieldDerivs<Var<'_>>> = Vec::with_capacity(m);
            for f in 0..m {
                let v0 = tape.var(pass.output(0, p, f));
                ids[0][f] = v0.index();
                let mut fd = FieldDerivs::constant(v0);
                for axis in 0..spec.dim() {
                    for k in 1..=spec.order(axis) {
                        let c = spec.channel(axis, k).unwrap();
                        let v = tape.var(pass.output(c, p, f));
                        ids[c][f] = v.index();
                        fd.set(axis, k, v);
                    }
                }
                q.push(fd);
            }
            let r = self.problem.residual(&q)?;
            let mut sq = tape.constant(0.0);
            for &ri in r.as_slice() {
                sq = sq + ri * ri;
            }
            lf += sq.value();
            if grad.is_some() {
                let a = tape.gradient(sq).map_err(|_| TrainError::NonFinite)?;
                for c in 0..channels {
                    for f in 0..m {
                        adj[(c * n + p) * m + f] = s * a.at(ids[c][f]);
                    }
                }
            }
        }
        if let Some(g) = grad {
            pass.backward(params, &adj, g);
        }

        let nb = if self.n_boundary == 0 { 1.0 } else { self.n_boundary as f64 };
        let terms = LossTerms::weighted(l0 / self.n_initial as f64, lb / nb, lf / n as f64, &self.weights);
        if !terms.is_finite() {
            return Err(TrainError::NonFinite);
        }
        Ok(terms)
    }

    /// Loss and a fresh gradient vector.
    pub fn loss_and_grad(&self, params: &[f64]) -> Result<(LossTerms, Vec<f64>), TrainError> {
        let mut g = vec![0.0; params.len()];
        let t = self.evaluate(params, Some(&mut g))?;
        Ok((t, g))
    }
}

/// Field derivatives at one point on the tape, one forward pass per axis.
fn point_derivs<'t>(
    tape: &'t Tape,
    net: &MlpConfig,
    params: &[Var<'t>],
    x: &[f64],
    orders: &[usize],
) -> Result<Vec<FieldDerivs<Var<'t>>>, TrainError> {
    let consts = |active: Option<usize>, k: usize| -> Result<Vec<Jet<Var<'t>>>, TrainError> {
        x.iter().enumerate().map(|(a, &v)| Ok(Jet::lift(tape.constant(v), active == Some(a), k)?)).collect()
    };
    let base = forward(net, params, &consts(None, 0)?)?;
    let mut out: Vec<FieldDerivs<Var<'t>>> = base.iter().map(|j| FieldDerivs::constant(j.value())).collect();
    for (axis, &k) in orders.iter().enumerate() {
        if k == 0 {
            continue;
        }
        let jets = forward(net, params, &consts(Some(axis), k)?)?;
        for (fd, j) in out.iter_mut().zip(&jets) {
            for order in 1..=k {
                fd.set(axis, order, j.deriv(order));
            }
        }
    }
    Ok(out)
}

/// The same loss built as one scalar graph on `tape`.
///
/// Slow, but every operation goes through the generic scalar path, so it
/// checks the batched evaluator end to end.
pub fn assemble_loss<'t>(
    tape: &'t Tape,
    net: &MlpConfig,
    params: &[Var<'t>],
    set: &CollocationSet,
    problem: &PdeProblem,
    weights: &LossWeights,
) -> Result<(Var<'t>, LossTerms), TrainError> {
    check_sizes(problem, net, set)?;
    let dim = set.dim;
    let zero = tape.constant(0.0);
    let (mut l0, mut lb, mut lf) = (zero, zero, zero);
    let mut flux_orders = vec![1; dim];
    flux_orders[problem.time_axis()] = 0;
    for (d, initial) in set.initial.iter().map(|d| (d, true)).chain(set.boundary.iter().map(|d| (d, false))) {
        let x = &d.point[..dim];
        let q: Vec<Var<'t>> = match d.cond {
            Condition::Neumann(face, _) => {
                point_derivs(tape, net, params, x, &flux_orders)?.iter().map(|fd| fd.get(face.axis, 1)).collect()
            }
            _ => point_derivs(tape, net, params, x, &vec![0; dim])?.iter().map(|fd| fd.value).collect(),
        };
        let t = d.cond.targets();
        for (f, v) in q.iter().enumerate() {
            let e = *v - t[f];
            if initial {
                l0 = l0 + e * e;
            } else {
                lb = lb + e * e;
            }
        }
    }
    let orders = problem.deriv_orders();
    for i in 0..set.interior_len() {
        let q = point_derivs(tape, net, params, set.interior_point(i), &orders)?;
        for r in problem.residual(&q)?.as_slice() {
            lf = lf + *r * *r;
        }
    }
    let nb = set.boundary.len().max(1) as f64;
    let l0 = l0 * (1.0 / set.initial.len() as f64);
    let lb = lb * (1.0 / nb);
    let lf = lf * (1.0 / set.interior_len() as f64);
    let total = l0 * weights.initial + lb * weights.boundary + lf * weights.residual;
    let terms = LossTerms::weighted(l0.value(), lb.value(), lf.value(), weights);
    Ok((total, terms))
}
