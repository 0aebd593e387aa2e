//! Experiment configuration files (JSON, schema version 1).

use pinnbench_core::network::{Activation, MlpConfig};
use pinnbench_core::problems::ProblemId;
use pinnbench_core::trainer::{LossWeights, OptimizerChoice, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub problem: String,
    /// Hidden layer counts to sweep.
    pub layers: Vec<usize>,
    /// Hidden widths to sweep.
    pub neurons: Vec<usize>,
    #[serde(default = "default_activation")]
    pub activation: String,
    pub optimizer: OptimizerBlock,
    pub iterations: usize,
    pub sampling: SamplingBlock,
    pub seeds: Vec<u64>,
    #[serde(default = "default_cadence")]
    pub cadence: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightsBlock>,
    /// Desk-scale divisor on point counts and evaluation grids.
    #[serde(default = "default_scale")]
    pub scale: usize,
    /// Output subdirectory, relative to the output root.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum OptimizerBlock {
    Adam {
        lr: f64,
        #[serde(default = "beta1")]
        beta1: f64,
        #[serde(default = "beta2")]
        beta2: f64,
        #[serde(default = "eps")]
        eps: f64,
    },
    Lbfgs {
        #[serde(default = "memory")]
        memory: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingBlock {
    pub n_data: usize,
    pub n_interior: usize,
    #[serde(default)]
    pub resample: bool,
    #[serde(default)]
    pub ic_only: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsBlock {
    pub initial: f64,
    pub boundary: f64,
    pub residual: f64,
}

fn default_activation() -> String {
    "sigmoid".into()
}
fn default_cadence() -> usize {
    100
}
fn default_scale() -> usize {
    1
}
fn beta1() -> f64 {
    0.9
}
fn beta2() -> f64 {
    0.999
}
fn eps() -> f64 {
    1e-8
}
fn memory() -> usize {
    10
}

/// One cell of the sweep cross product.
#[derive(Debug, Clone)]
pub struct Cell {
    pub layers: usize,
    pub neurons: usize,
    pub seed: u64,
    pub train: TrainConfig,
}

impl Cell {
    pub fn tag(&self, problem: &str) -> String {
        format!("{problem}_{}x{}_s{}", self.layers, self.neurons, self.seed)
    }
}

impl ExperimentConfig {
    pub fn preset(id: ProblemId) -> Self {
        let t = TrainConfig::preset(id);
        let optimizer = match t.optimizer {
            OptimizerChoice::Adam { lr, beta1, beta2, eps } => OptimizerBlock::Adam { lr, beta1, beta2, eps },
            OptimizerChoice::Lbfgs { memory } => OptimizerBlock::Lbfgs { memory },
        };
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            problem: id.name().into(),
            layers: vec![t.net.hidden_layers],
            neurons: vec![t.net.hidden_width],
            activation: t.net.activation.name().into(),
            optimizer,
            iterations: t.iterations,
            sampling: SamplingBlock {
                n_data: t.n_data,
                n_interior: t.n_interior,
                resample: t.resample,
                ic_only: t.problem.ic_only,
            },
            seeds: vec![1],
            cadence: t.cadence,
            weights: None,
            scale: 1,
            output_dir: Some(id.name().into()),
        }
    }

    /// Parse JSON, reporting the line and column of syntax and type errors.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| CliError::usage(format!("config error at line {}, column {}: {e}", e.line(), e.column())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn problem_id(&self) -> Result<ProblemId, CliError> {
        ProblemId::parse(&self.problem).map_err(|_| CliError::usage(format!("unknown problem '{}'", self.problem)))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::usage(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.problem_id()?;
        if Activation::parse(&self.activation).is_none() {
            return Err(CliError::usage(format!("unknown activation '{}'", self.activation)));
        }
        if self.layers.is_empty() || self.neurons.is_empty() || self.seeds.is_empty() {
            return Err(CliError::usage("layers, neurons and seeds must each list at least one value"));
        }
        self.cells().map(|_| ())
    }

    /// Expand the sweep axes, seeds innermost.
    pub fn cells(&self) -> Result<Vec<Cell>, CliError> {
        let id = self.problem_id()?;
        let act = Activation::parse(&self.activation)
            .ok_or_else(|| CliError::usage(format!("unknown activation '{}'", self.activation)))?;
        let mut out = Vec::new();
        for &layers in &self.layers {
            for &neurons in &self.neurons {
                for &seed in &self.seeds {
                    let mut t = TrainConfig::preset(id);
                    t.problem.ic_only = self.sampling.ic_only;
                    t.net = MlpConfig::new(t.problem.input_dim(), layers, neurons, t.problem.fields(), act)
                        .map_err(|e| CliError::usage(e.to_string()))?;
                    t.optimizer = match self.optimizer {
                        OptimizerBlock::Adam { lr, beta1, beta2, eps } => {
                            OptimizerChoice::Adam { lr, beta1, beta2, eps }
                        }
                        OptimizerBlock::Lbfgs { memory } => OptimizerChoice::Lbfgs { memory },
                    };
                    t.iterations = self.iterations;
                    t.n_data = self.sampling.n_data;
                    t.n_interior = self.sampling.n_interior;
                    t.resample = self.sampling.resample;
                    t.seed = seed;
                    t.cadence = self.cadence;
                    t.scale = self.scale;
                    if let Some(w) = self.weights {
                        t.weights = LossWeights { initial: w.initial, boundary: w.boundary, residual: w.residual };
                    }
                    t.validate().map_err(|e| CliError::usage(e.to_string()))?;
                    out.push(Cell { layers, neurons, seed, train: t });
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip() {
        for id in ProblemId::ALL {
            let c = ExperimentConfig::preset(id);
            let back = ExperimentConfig::parse(&c.to_json()).unwrap();
            assert_eq!(back, c);
            let cell = &back.cells().unwrap()[0];
            assert_eq!(cell.train.net, TrainConfig::preset(id).net);
        }
    }

    #[test]
    fn errors_carry_position() {
        let e = ExperimentConfig::parse("{\n  \"schema_version\": 1,\n  \"problem\": oops\n}").unwrap_err();
        assert_eq!(e.code, 2);
        assert!(e.message.contains("line 3"), "{}", e.message);
    }

    #[test]
    fn cross_product_size() {
        let mut c = ExperimentConfig::preset(ProblemId::Toy);
        c.layers = vec![2, 3, 4];
        c.neurons = vec![8, 16, 32];
        assert_eq!(c.cells().unwrap().len(), 9);
        c.seeds = vec![];
        assert!(c.validate().is_err());
    }

    #[test]
    fn shipped_presets_parse() {
        let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../presets");
        for id in ProblemId::ALL {
            let path = format!("{dir}/{}.json", id.name());
            let text = std::fs::read_to_string(&path).unwrap();
            assert_eq!(ExperimentConfig::parse(&text).unwrap(), ExperimentConfig::preset(id), "{path}");
        }
    }
}
