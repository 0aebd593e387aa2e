//! Layer-at-a-time jet propagation over a whole batch of points.
//!
//! Equivalent to running [`forward`](super::forward) on every point with one
//! jet per input axis, but all derivative channels of all points are stacked
//! into one matrix per layer so each layer is a single GEMM. The reverse pass
//! is written out by hand and returns parameter gradients for any adjoint on
//! the output channels.

use alloc::vec;
use alloc::vec::Vec;

use super::{MlpConfig, NetworkError, ParamVector};
use crate::autodiff::{AdError, MAX_ORDER};

/// Derivative orders carried per input axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelSpec {
    dim: usize,
    orders: [usize; 3],
}

impl ChannelSpec {
    pub fn new(orders: &[usize]) -> Result<Self, AdError> {
        let mut o = [0; 3];
        for (i, &k) in orders.iter().enumerate().take(3) {
            if k > MAX_ORDER {
                return Err(AdError::OrderTooHigh { requested: k });
            }
            o[i] = k;
        }
        Ok(ChannelSpec { dim: orders.len().min(3), orders: o })
    }

    /// Values only.
    pub fn values(dim: usize) -> Self {
        ChannelSpec { dim, orders: [0; 3] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self, axis: usize) -> usize {
        self.orders[axis]
    }

    pub fn max_order(&self) -> usize {
        self.orders.iter().copied().max().unwrap_or(0)
    }

    /// Number of channels: the value plus one per (axis, order ≥ 1).
    pub fn count(&self) -> usize {
        1 + self.orders[..self.dim].iter().sum::<usize>()
    }

    /// Channel holding the k-th derivative along `axis` (k = 0 is the value).
    pub fn channel(&self, axis: usize, k: usize) -> Option<usize> {
        if k == 0 {
            return Some(0);
        }
        if axis >= self.dim || k > self.orders[axis] {
            return None;
        }
        Some(1 + self.orders[..axis].iter().sum::<usize>() + k - 1)
    }
}

/// Cached forward pass over a batch, ready for a reverse sweep.
///
/// Buffers are kept between calls to [`BatchPass::run`], so a training loop
/// that reuses one pass does not allocate per iteration.
#[derive(Debug, Clone)]
pub struct BatchPass {
    config: MlpConfig,
    spec: ChannelSpec,
    n: usize,
    input: Vec<f64>,
    /// Pre-activations per layer, `[channel][point][unit]`.
    z: Vec<Vec<f64>>,
    /// Post-activations per hidden layer, same layout.
    h: Vec<Vec<f64>>,
    /// φ⁽ᵏ⁾(z₀) per hidden layer, `[k][point][unit]` for k up to max order + 1.
    phi: Vec<Vec<f64>>,
    scratch: [Vec<f64>; 3],
}

#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    rsa: usize,
    csa: usize,
    b: &[f64],
    rsb: usize,
    csb: usize,
    beta: f64,
    c: &mut [f64],
    rsc: usize,
) {
    if m == 0 || n == 0 {
        return;
    }
    debug_assert!(a.len() > (m - 1) * rsa + (k.max(1) - 1) * csa || k == 0);
    debug_assert!(c.len() >= (m - 1) * rsc + n);
    // SAFETY: the strides describe matrices that lie inside the given slices.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            rsc as isize,
            1,
        );
    }
}

impl BatchPass {
    /// An empty pass for `config`; fill it with [`BatchPass::run`].
    pub fn new(config: &MlpConfig, spec: ChannelSpec) -> Self {
        let layers = config.hidden_layers + 1;
        BatchPass {
            config: *config,
            spec,
            n: 0,
            input: Vec::new(),
            z: vec![Vec::new(); layers],
            h: vec![Vec::new(); layers - 1],
            phi: vec![Vec::new(); layers - 1],
            scratch: [Vec::new(), Vec::new(), Vec::new()],
        }
    }

    /// Run the network on `points` (row-major, `n × input_dim`).
    pub fn forward(
        config: &MlpConfig,
        params: &[f64],
        points: &[f64],
        spec: ChannelSpec,
    ) -> Result<Self, NetworkError> {
        let mut pass = BatchPass::new(config, spec);
        pass.run(params, points)?;
        Ok(pass)
    }

    /// Recompute the pass in place for new parameters or points.
    pub fn run(&mut self, params: &[f64], points: &[f64]) -> Result<(), NetworkError> {
        let config = self.config;
        let spec = self.spec;
        let expected = config.param_count();
        if params.len() != expected {
            return Err(NetworkError::ParamLength { expected, got: params.len() });
        }
        let d = config.input_dim;
        if spec.dim() != d || !points.len().is_multiple_of(d) {
            return Err(NetworkError::InputLength { expected: d, got: spec.dim() });
        }
        let n = points.len() / d;
        self.n = n;
        let nc = spec.count();
        let rows = nc * n;
        let kmax = spec.max_order();

        let input = &mut self.input;
        input.clear();
        input.resize(rows * d, 0.0);
        input[..n * d].copy_from_slice(points);
        for a in 0..d {
            if let Some(c) = spec.channel(a, 1) {
                for p in 0..n {
                    input[(c * n + p) * d + a] = 1.0;
                }
            }
        }

        let layout = ParamVector::layout(&config);
        let last = layout.len() - 1;
        for (l, slot) in layout.iter().enumerate() {
            let (fi, fo) = (slot.fan_in, slot.fan_out);
            let (h_done, h_rest) = self.h.split_at_mut(l.min(last));
            let prev: &[f64] = if l == 0 { &self.input } else { &h_done[l - 1] };
            let w = &params[slot.weights..slot.biases];
            let b = &params[slot.biases..slot.biases + fo];
            let z = &mut self.z[l];
            z.resize(rows * fo, 0.0);
            gemm(rows, fi, fo, prev, fi, 1, w, 1, fi, 0.0, z, fo);
            for p in 0..n {
                for (zo, bo) in z[p * fo..(p + 1) * fo].iter_mut().zip(b) {
                    *zo += bo;
                }
            }
            if l < last {
                let h = &mut h_rest[0];
                h.resize(rows * fo, 0.0);
                let phi = &mut self.phi[l];
                phi.resize((kmax + 2) * n * fo, 0.0);
                let plane = n * fo;
                let np = kmax + 2;
                for (idx, &zv) in z[..plane].iter().enumerate() {
                    let ph = config.activation.derivs(zv);
                    for k in 0..np {
                        phi[k * plane + idx] = ph[k];
                    }
                }
                h[..plane].copy_from_slice(&phi[..plane]);
                let p1 = &phi[plane..2 * plane];
                for a in 0..d {
                    let ka = spec.order(a);
                    if ka == 0 {
                        continue;
                    }
                    let base = spec.channel(a, 1).unwrap() * plane;
                    let zs = &z[base..base + ka * plane];
                    let hs = &mut h[base..base + ka * plane];
                    let z1 = &zs[..plane];
                    match ka {
                        1 => {
                            for ((hv, &pv), &zv) in hs.iter_mut().zip(p1).zip(z1) {
                                *hv = pv * zv;
                            }
                        }
                        2 => {
                            let p2 = &phi[2 * plane..3 * plane];
                            let z2 = &zs[plane..2 * plane];
                            let (h1, h2) = hs.split_at_mut(plane);
                            for i in 0..plane {
                                h1[i] = p1[i] * z1[i];
                                h2[i] = p2[i] * z1[i] * z1[i] + p1[i] * z2[i];
                            }
                        }
                        _ => {
                            let p2 = &phi[2 * plane..3 * plane];
                            let p3 = &phi[3 * plane..4 * plane];
                            let z2 = &zs[plane..2 * plane];
                            let z3 = &zs[2 * plane..3 * plane];
                            let (h1, rest) = hs.split_at_mut(plane);
                            let (h2, h3) = rest.split_at_mut(plane);
                            for i in 0..plane {
                                let (a1, a2) = (z1[i], z2[i]);
                                h1[i] = p1[i] * a1;
                                h2[i] = p2[i] * a1 * a1 + p1[i] * a2;
                                h3[i] = p3[i] * a1 * a1 * a1 + 3.0 * p2[i] * a1 * a2 + p1[i] * z3[i];
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spec(&self) -> &ChannelSpec {
        &self.spec
    }

    /// Output channels, `[channel][point][field]`.
    pub fn outputs(&self) -> &[f64] {
        self.z.last().unwrap()
    }

    pub fn output(&self, channel: usize, point: usize, field: usize) -> f64 {
        let m = self.config.output_dim;
        self.outputs()[(channel * self.n + point) * m + field]
    }

    /// Accumulate into `grad` the parameter gradient of Σ adj·outputs.
    pub fn backward(&mut self, params: &[f64], adj_out: &[f64], grad: &mut [f64]) {
        let n = self.n;
        let rows = self.spec.count() * n;
        let d = self.config.input_dim;
        let layout = ParamVector::layout(&self.config);
        assert_eq!(adj_out.len(), rows * self.config.output_dim);
        assert_eq!(grad.len(), params.len());

        let [az, ah, az_prev] = &mut self.scratch;
        az.clear();
        az.extend_from_slice(adj_out);
        for l in (0..layout.len()).rev() {
            let slot = layout[l];
            let (fi, fo) = (slot.fan_in, slot.fan_out);
            let hin: &[f64] = if l == 0 { &self.input } else { &self.h[l - 1] };
            gemm(fo, rows, fi, az, 1, fo, hin, fi, 1, 1.0, &mut grad[slot.weights..slot.biases], fi);
            let gb = &mut grad[slot.biases..slot.biases + fo];
            for p in 0..n {
                for (g, a) in gb.iter_mut().zip(&az[p * fo..(p + 1) * fo]) {
                    *g += a;
                }
            }
            if l == 0 {
                break;
            }
            let w = &params[slot.weights..slot.biases];
            ah.resize(rows * fi, 0.0);
            gemm(rows, fo, fi, az, fo, 1, w, fi, 1, 0.0, ah, fi);

            // Back through the activation of layer l-1 (width fi).
            let z = &self.z[l - 1];
            let phi = &self.phi[l - 1];
            let plane = n * fi;
            az_prev.resize(rows * fi, 0.0);
            let kmax = self.spec.max_order();
            let ph = |k: usize| if k <= kmax + 1 { &phi[k * plane..(k + 1) * plane] } else { &phi[..0] };
            let (p1, p2, p3, p4) = (ph(1), ph(2), ph(3), ph(4));
            let (a0, arest) = az_prev.split_at_mut(plane);
            for ((o, &g), &pv) in a0.iter_mut().zip(&ah[..plane]).zip(p1) {
                *o = g * pv;
            }
            for a in 0..d {
                let ka = self.spec.order(a);
                if ka == 0 {
                    continue;
                }
                let base = self.spec.channel(a, 1).unwrap() * plane;
                let zs = &z[base..base + ka * plane];
                let gs = &ah[base..base + ka * plane];
                let outs = &mut arest[base - plane..base - plane + ka * plane];
                let (z1, g1) = (&zs[..plane], &gs[..plane]);
                match ka {
                    1 => {
                        for i in 0..plane {
                            a0[i] += g1[i] * p2[i] * z1[i];
                            outs[i] = g1[i] * p1[i];
                        }
                    }
                    2 => {
                        let (z2, g2) = (&zs[plane..], &gs[plane..]);
                        let (o1, o2) = outs.split_at_mut(plane);
                        for i in 0..plane {
                            let (x1, x2, y1, y2) = (z1[i], z2[i], g1[i], g2[i]);
                            a0[i] += y1 * p2[i] * x1 + y2 * (p3[i] * x1 * x1 + p2[i] * x2);
                            o1[i] = y1 * p1[i] + y2 * 2.0 * p2[i] * x1;
                            o2[i] = y2 * p1[i];
                        }
                    }
                    _ => {
                        let (z2, g2) = (&zs[plane..2 * plane], &gs[plane..2 * plane]);
                        let (z3, g3) = (&zs[2 * plane..], &gs[2 * plane..]);
                        let (o1, rest) = outs.split_at_mut(plane);
                        let (o2, o3) = rest.split_at_mut(plane);
                        for i in 0..plane {
                            let (x1, x2, x3) = (z1[i], z2[i], z3[i]);
                            let (y1, y2, y3) = (g1[i], g2[i], g3[i]);
                            a0[i] += y1 * p2[i] * x1
                                + y2 * (p3[i] * x1 * x1 + p2[i] * x2)
                                + y3 * (p4[i] * x1 * x1 * x1 + 3.0 * p3[i] * x1 * x2 + p2[i] * x3);
                            o1[i] =
                                y1 * p1[i] + y2 * 2.0 * p2[i] * x1 + y3 * (3.0 * p3[i] * x1 * x1 + 3.0 * p2[i] * x2);
                            o2[i] = y2 * p1[i] + y3 * 3.0 * p2[i] * x1;
                            o3[i] = y3 * p1[i];
                        }
                    }
                }
            }
            core::mem::swap(az, az_prev);
        }
    }
}
