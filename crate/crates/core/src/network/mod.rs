//! Fully-connected feed-forward networks.
//!
//! Parameters live in one flat [`ParamVector`]. For every layer the weights
//! come first, row-major with one row per output unit, then the biases.
//! Hidden layers apply the configured activation; the output layer is linear.

mod batch;
pub mod check;

pub use batch::{BatchPass, ChannelSpec};

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::autodiff::{Jet, Scalar};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Sigmoid,
    Tanh,
    Relu,
}

impl Activation {
    pub fn name(&self) -> &'static str {
        match self {
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sigmoid" => Some(Activation::Sigmoid),
            "tanh" => Some(Activation::Tanh),
            "relu" => Some(Activation::Relu),
            _ => None,
        }
    }

    fn apply_jet<S: Scalar>(&self, j: &Jet<S>) -> Jet<S> {
        match self {
            Activation::Sigmoid => j.sigmoid(),
            Activation::Tanh => j.tanh(),
            Activation::Relu => j.relu(),
        }
    }

    /// φ⁽ᵏ⁾(z) for k = 0..=4.
    pub(crate) fn derivs(&self, z: f64) -> [f64; 5] {
        match self {
            Activation::Sigmoid => {
                let s = math::sigmoid(z);
                let p = s * (1.0 - s);
                let d2 = p * (1.0 - 2.0 * s);
                let d3 = p * (1.0 - 6.0 * s + 6.0 * s * s);
                let d4 = p * (1.0 - 2.0 * s) * (1.0 - 12.0 * s + 12.0 * s * s);
                [s, p, d2, d3, d4]
            }
            Activation::Tanh => {
                let t = math::tanh(z);
                let s = 1.0 - t * t;
                [t, s, -2.0 * t * s, s * (6.0 * t * t - 2.0), t * s * (16.0 - 24.0 * t * t)]
            }
            Activation::Relu => {
                if z > 0.0 {
                    [z, 1.0, 0.0, 0.0, 0.0]
                } else {
                    [0.0; 5]
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NetworkError {
    InvalidConfig(String),
    ParamLength { expected: usize, got: usize },
    InputLength { expected: usize, got: usize },
    Format(String),
}

impl fmt::Display for NetworkError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetworkError::InvalidConfig(m) => write!(f, "invalid network config: {m}"),
            NetworkError::ParamLength { expected, got } => {
                write!(f, "parameter vector has length {got}, network needs {expected}")
            }
            NetworkError::InputLength { expected, got } => {
                write!(f, "network takes {expected} inputs, got {got}")
            }
            NetworkError::Format(m) => write!(f, "malformed parameter file: {m}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for NetworkError {}

/// Network shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MlpConfig {
    pub input_dim: usize,
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub output_dim: usize,
    pub activation: Activation,
}

impl MlpConfig {
    pub fn new(
        input_dim: usize,
        hidden_layers: usize,
        hidden_width: usize,
        output_dim: usize,
        activation: Activation,
    ) -> Result<Self, NetworkError> {
        let c = MlpConfig { input_dim, hidden_layers, hidden_width, output_dim, activation };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), NetworkError> {
        if !(1..=3).contains(&self.input_dim) {
            return Err(NetworkError::InvalidConfig(alloc::format!(
                "input_dim must be 1, 2 or 3 (got {})",
                self.input_dim
            )));
        }
        if !(1..=2).contains(&self.output_dim) {
            return Err(NetworkError::InvalidConfig(alloc::format!(
                "output_dim must be 1 or 2 (got {})",
                self.output_dim
            )));
        }
        if self.hidden_layers == 0 || self.hidden_width == 0 {
            return Err(NetworkError::InvalidConfig("need at least one hidden layer and unit".into()));
        }
        Ok(())
    }

    /// `(fan_in, fan_out)` for every layer, input to output.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut v = Vec::with_capacity(self.hidden_layers + 1);
        let mut fan_in = self.input_dim;
        for _ in 0..self.hidden_layers {
            v.push((fan_in, self.hidden_width));
            fan_in = self.hidden_width;
        }
        v.push((fan_in, self.output_dim));
        v
    }

    pub fn param_count(&self) -> usize {
        self.layer_shapes().iter().map(|(i, o)| i * o + o).sum()
    }
}

/// Flat trainable parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector(pub Vec<f64>);

const PARAM_MAGIC: &[u8; 4] = b"PVEC";
const PARAM_VERSION: u32 = 1;

impl ParamVector {
    pub fn zeros(config: &MlpConfig) -> Self {
        ParamVector(alloc::vec![0.0; config.param_count()])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    /// 16-byte header (magic, version, length) then little-endian values.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 8 * self.0.len());
        out.extend_from_slice(PARAM_MAGIC);
        out.extend_from_slice(&PARAM_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.0.len() as u64).to_le_bytes());
        for v in &self.0 {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, NetworkError> {
        if bytes.len() < 16 || &bytes[..4] != PARAM_MAGIC {
            return Err(NetworkError::Format("bad magic".into()));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != PARAM_VERSION {
            return Err(NetworkError::Format(alloc::format!("unsupported version {version}")));
        }
        let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let body = &bytes[16..];
        if body.len() != n * 8 {
            return Err(NetworkError::Format(alloc::format!(
                "header says {n} values, body holds {} bytes",
                body.len()
            )));
        }
        Ok(ParamVector(body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect()))
    }

    /// Offsets of each layer's weight block and bias block.
    pub fn layout(config: &MlpConfig) -> Vec<LayerSlot> {
        let mut off = 0;
        config
            .layer_shapes()
            .into_iter()
            .map(|(fan_in, fan_out)| {
                let slot = LayerSlot { fan_in, fan_out, weights: off, biases: off + fan_in * fan_out };
                off += fan_in * fan_out + fan_out;
                slot
            })
            .collect()
    }
}

/// Position of one layer inside a [`ParamVector`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSlot {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weights: usize,
    pub biases: usize,
}

/// Glorot-uniform weights and zero biases.
pub fn init(config: &MlpConfig, seed: u64) -> ParamVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = ParamVector::zeros(config);
    for slot in ParamVector::layout(config) {
        let limit = math::sqrt(6.0 / (slot.fan_in + slot.fan_out) as f64);
        for w in &mut p.0[slot.weights..slot.biases] {
            *w = rng.gen_range(-limit..=limit);
        }
    }
    p
}

/// Evaluate the network on jets of the input coordinates.
pub fn forward<S: Scalar>(config: &MlpConfig, params: &[S], inputs: &[Jet<S>]) -> Result<Vec<Jet<S>>, NetworkError> {
    let expected = config.param_count();
    if params.len() != expected {
        return Err(NetworkError::ParamLength { expected, got: params.len() });
    }
    if inputs.len() != config.input_dim {
        return Err(NetworkError::InputLength { expected: config.input_dim, got: inputs.len() });
    }
    let layout = ParamVector::layout(config);
    let last = layout.len() - 1;
    let mut h: Vec<Jet<S>> = inputs.to_vec();
    for (l, slot) in layout.iter().enumerate() {
        let mut next = Vec::with_capacity(slot.fan_out);
        for o in 0..slot.fan_out {
            let row = &params[slot.weights + o * slot.fan_in..slot.weights + (o + 1) * slot.fan_in];
            let mut z = h[0].scale(row[0]);
            for (hi, w) in h.iter().zip(row).skip(1) {
                z = z + hi.scale(*w);
            }
            z = z.shift(params[slot.biases + o]);
            next.push(if l == last { z } else { config.activation.apply_jet(&z) });
        }
        h = next;
    }
    Ok(h)
}

/// Plain value evaluation at one point.
pub fn eval_point(config: &MlpConfig, params: &[f64], x: &[f64]) -> Result<Vec<f64>, NetworkError> {
    let inputs: Vec<Jet<f64>> = x.iter().map(|&v| Jet::constant(v, 0).unwrap()).collect();
    Ok(forward(config, params, &inputs)?.iter().map(|j| j.value()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(act: Activation) -> MlpConfig {
        MlpConfig::new(2, 5, 5, 1, act).unwrap()
    }

    #[test]
    fn param_count_matches_layout() {
        assert_eq!(cfg(Activation::Tanh).param_count(), 141);
        assert_eq!(init(&cfg(Activation::Tanh), 3).len(), 141);
    }

    #[test]
    fn init_is_reproducible_and_bounded() {
        let c = cfg(Activation::Sigmoid);
        let a = init(&c, 42);
        assert_eq!(a, init(&c, 42));
        assert_ne!(a, init(&c, 43));
        for slot in ParamVector::layout(&c) {
            let limit = math::sqrt(6.0 / (slot.fan_in + slot.fan_out) as f64);
            assert!(a.0[slot.weights..slot.biases].iter().all(|w| w.abs() <= limit));
            assert!(a.0[slot.biases..slot.biases + slot.fan_out].iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn zero_params_give_zero() {
        let c = cfg(Activation::Sigmoid);
        let p = ParamVector::zeros(&c);
        assert_eq!(eval_point(&c, &p.0, &[0.3, -2.0]).unwrap(), vec![0.0]);
        let mut p = p;
        let n = p.len();
        p.0[n - 1] = 1.75;
        assert_eq!(eval_point(&c, &p.0, &[9.0, 1.0]).unwrap(), vec![1.75]);
    }

    #[test]
    fn shape_errors() {
        let c = cfg(Activation::Tanh);
        assert!(matches!(eval_point(&c, &[0.0; 3], &[0.0, 0.0]), Err(NetworkError::ParamLength { .. })));
        let p = init(&c, 1);
        assert!(matches!(eval_point(&c, &p.0, &[0.0]), Err(NetworkError::InputLength { .. })));
        assert!(MlpConfig::new(4, 1, 1, 1, Activation::Tanh).is_err());
        assert!(MlpConfig::new(1, 0, 1, 1, Activation::Tanh).is_err());
    }

    #[test]
    fn bytes_roundtrip_and_rejects_garbage() {
        let p = ParamVector(vec![1.5, -0.0, f64::MIN_POSITIVE, 1e300]);
        let q = ParamVector::from_bytes(&p.to_bytes()).unwrap();
        assert!(p.0.iter().zip(&q.0).all(|(a, b)| a.to_bits() == b.to_bits()));
        let mut b = p.to_bytes();
        b.pop();
        assert!(ParamVector::from_bytes(&b).is_err());
        assert!(ParamVector::from_bytes(b"nope").is_err());
    }

    #[test]
    fn tanh_unit_reflection() {
        // 1 hidden unit: flipping its incoming and outgoing weights and bias leaves the output unchanged.
        let c = MlpConfig::new(2, 1, 1, 1, Activation::Tanh).unwrap();
        let p = ParamVector(vec![0.4, -1.2, 0.3, 0.9, 0.05]);
        let q = ParamVector(vec![-0.4, 1.2, -0.3, -0.9, 0.05]);
        for x in [[0.1, 0.2], [-3.0, 1.0], [2.0, 2.0]] {
            let a = eval_point(&c, &p.0, &x).unwrap()[0];
            let b = eval_point(&c, &q.0, &x).unwrap()[0];
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn relu_network_runs() {
        let c = MlpConfig::new(2, 2, 4, 1, Activation::Relu).unwrap();
        let p = init(&c, 9);
        assert!(eval_point(&c, &p.0, &[0.5, 0.5]).unwrap()[0].is_finite());
    }

    proptest! {
        #[test]
        fn order_zero_matches_order_three_value(seed in 0u64..1000, x in -3.0f64..3.0, t in -3.0f64..3.0) {
            let c = cfg(Activation::Sigmoid);
            let p = init(&c, seed);
            let v0 = forward(&c, &p.0, &[Jet::constant(x, 0).unwrap(), Jet::constant(t, 0).unwrap()]).unwrap();
            let v3 = forward(&c, &p.0, &[Jet::lift(x, true, 3).unwrap(), Jet::lift(t, false, 3).unwrap()]).unwrap();
            prop_assert_eq!(v0[0].value().to_bits(), v3[0].value().to_bits());
        }

        #[test]
        fn bytes_roundtrip_bitwise(v in proptest::collection::vec(any::<f64>(), 0..64)) {
            let p = ParamVector(v);
            let q = ParamVector::from_bytes(&p.to_bytes()).unwrap();
            prop_assert_eq!(p.0.len(), q.0.len());
            for (a, b) in p.0.iter().zip(&q.0) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
