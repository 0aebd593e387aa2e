//! Physics-informed training: loss assembly, the optimisation loop and scoring.

mod eval;
mod loss;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use eval::{evaluate_on_grid, oracle_on_grid, references, References, Rmse};
pub use loss::{assemble_loss, LossEvaluator, LossTerms, LossWeights};

use crate::autodiff::AdError;
use crate::fdm::{FdError, FieldGrid};
use crate::network::{init, Activation, MlpConfig, NetworkError, ParamVector};
use crate::optim::{AdamState, LbfgsState, LbfgsStep, OptimError};
use crate::oracles::OracleError;
use crate::problems::{PdeProblem, ProblemError, ProblemId};
use crate::sampling::{round_data_count, sample, SamplingError};

#[derive(Debug, Clone, PartialEq)]
pub enum TrainError {
    Config(String),
    Network(NetworkError),
    Problem(ProblemError),
    Sampling(SamplingError),
    Autodiff(AdError),
    Fd(FdError),
    Oracle(OracleError),
    Optim(OptimError),
    /// Loss or gradient stopped being finite.
    NonFinite,
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::Config(m) => write!(f, "invalid training config: {m}"),
            TrainError::Network(e) => write!(f, "{e}"),
            TrainError::Problem(e) => write!(f, "{e}"),
            TrainError::Sampling(e) => write!(f, "{e}"),
            TrainError::Autodiff(e) => write!(f, "{e}"),
            TrainError::Fd(e) => write!(f, "reference solver: {e}"),
            TrainError::Oracle(e) => write!(f, "{e}"),
            TrainError::Optim(e) => write!(f, "{e}"),
            TrainError::NonFinite => f.write_str("loss is not finite"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for TrainError {}

macro_rules! from_err {
    ($($t:ty => $v:ident),*) => {$(
        impl From<$t> for TrainError {
            fn from(e: $t) -> Self {
                TrainError::$v(e)
            }
        }
    )*};
}
from_err!(NetworkError => Network, ProblemError => Problem, SamplingError => Sampling,
    AdError => Autodiff, FdError => Fd, OracleError => Oracle, OptimError => Optim);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizerChoice {
    Adam { lr: f64, beta1: f64, beta2: f64, eps: f64 },
    Lbfgs { memory: usize },
}

impl OptimizerChoice {
    pub fn adam(lr: f64) -> Self {
        OptimizerChoice::Adam { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub problem: PdeProblem,
    pub net: MlpConfig,
    pub optimizer: OptimizerChoice,
    pub iterations: usize,
    /// Initial plus face points.
    pub n_data: usize,
    pub n_interior: usize,
    pub seed: u64,
    /// Record the loss every `cadence` iterations.
    pub cadence: usize,
    pub weights: LossWeights,
    /// Draw a fresh collocation set every iteration.
    pub resample: bool,
    /// Desk-scale divisor on point counts and evaluation grid density.
    pub scale: usize,
}

impl TrainConfig {
    /// Settings of each problem's reference experiment.
    pub fn preset(id: ProblemId) -> Self {
        let mut problem = PdeProblem::preset(id);
        let sig = Activation::Sigmoid;
        let (layers, width, act, iterations, n_data, n_interior) = match id {
            ProblemId::Toy => (5, 5, sig, 15000, 500, 500),
            ProblemId::Burgers => (4, 32, sig, 15000, 4000, 10000),
            ProblemId::Heat2d => (4, 32, sig, 15000, 4000, 10000),
            ProblemId::Kdv => (7, 32, sig, 15000, 1000, 15000),
            ProblemId::Fisher => (4, 32, sig, 20000, 2000, 15000),
            ProblemId::Turing1 => (7, 32, sig, 15000, 14000, 20000),
            ProblemId::Turing2 => (7, 16, sig, 6000, 400, 10000),
            ProblemId::ExpOde => (2, 16, Activation::Tanh, 5000, 100, 100),
        };
        let resample = id == ProblemId::Toy;
        problem.ic_only = id == ProblemId::Toy;
        let net =
            MlpConfig::new(problem.input_dim(), layers, width, problem.fields(), act).expect("preset shapes are valid");
        TrainConfig {
            problem,
            net,
            optimizer: OptimizerChoice::adam(1e-3),
            iterations,
            n_data,
            n_interior,
            seed: 0,
            cadence: 100,
            weights: LossWeights::default(),
            resample,
            scale: 1,
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        self.net.validate()?;
        if self.net.input_dim != self.problem.input_dim() || self.net.output_dim != self.problem.fields() {
            return Err(TrainError::Config("network shape does not fit the problem".into()));
        }
        if self.cadence == 0 || self.scale == 0 {
            return Err(TrainError::Config("cadence and scale must be at least 1".into()));
        }
        match self.optimizer {
            OptimizerChoice::Adam { lr, .. } if !(lr > 0.0) => {
                Err(TrainError::Config("learning rate must be positive".into()))
            }
            OptimizerChoice::Lbfgs { memory: 0 } => Err(TrainError::Config("L-BFGS memory must be positive".into())),
            _ => Ok(()),
        }
    }

    /// Point counts after the desk-scale divisor.
    pub fn effective_counts(&self) -> (usize, usize) {
        let s = self.scale.max(1);
        (round_data_count(&self.problem, self.n_data / s), self.n_interior / s)
    }
}

/// Loss terms before iteration `iteration`'s update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub terms: LossTerms,
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub history: Vec<HistoryEntry>,
    /// Loss at the final parameters on the last collocation set.
    pub final_loss: LossTerms,
    pub seconds: f64,
    pub params: ParamVector,
    pub iterations_run: usize,
    /// Iteration at which the loss stopped being finite.
    pub diverged_at: Option<usize>,
    /// Network values on the comparison grid.
    pub prediction: Option<FieldGrid>,
    pub rmse_oracle: Option<Rmse>,
    pub rmse_fd: Option<Rmse>,
}

impl TrainReport {
    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }
}

/// Seconds since some fixed instant.
pub trait Clock {
    fn now(&self) -> f64;
}

/// A clock that never advances, for builds without `std`.
pub struct NoClock;

impl Clock for NoClock {
    fn now(&self) -> f64 {
        0.0
    }
}

#[cfg(feature = "std")]
pub struct StdClock(std::time::Instant);

#[cfg(feature = "std")]
impl Default for StdClock {
    fn default() -> Self {
        StdClock(std::time::Instant::now())
    }
}

#[cfg(feature = "std")]
impl Clock for StdClock {
    fn now(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

fn mix(seed: u64, k: u64) -> u64 {
    let mut z = seed ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Train and score against freshly built references.
#[cfg(feature = "std")]
pub fn train(config: &TrainConfig) -> Result<TrainReport, TrainError> {
    let refs = references(&config.problem, config.scale)?;
    train_with(config, Some(&refs), &StdClock::default())
}

/// Train, then score against `refs` if given.
pub fn train_with(
    config: &TrainConfig,
    refs: Option<&References>,
    clock: &dyn Clock,
) -> Result<TrainReport, TrainError> {
    config.validate()?;
    let start = clock.now();
    let (n_data, n_interior) = config.effective_counts();
    let sample_seed = mix(config.seed, 0x5A4D_504C_4553);
    let mut params = init(&config.net, config.seed);
    let set = sample(&config.problem, n_data, n_interior, sample_seed)?;
    let mut ev = LossEvaluator::new(&config.problem, &config.net, &set, config.weights)?;
    let mut history = Vec::new();
    let mut diverged_at = None;
    let mut iterations_run = 0;

    match config.optimizer {
        OptimizerChoice::Adam { lr, beta1, beta2, eps } => {
            let mut adam = AdamState::with_params(params.len(), lr, beta1, beta2, eps);
            for k in 0..config.iterations {
                if config.resample && k > 0 {
                    let set = sample(&config.problem, n_data, n_interior, mix(sample_seed, k as u64))?;
                    ev = LossEvaluator::new(&config.problem, &config.net, &set, config.weights)?;
                }
                let (terms, grad) = match ev.loss_and_grad(params.as_slice()) {
                    Ok(v) => v,
                    Err(TrainError::NonFinite) => {
                        diverged_at = Some(k);
                        break;
                    }
                    Err(e) => return Err(e),
                };
                if k % config.cadence == 0 {
                    history.push(HistoryEntry { iteration: k, terms });
                }
                match adam.step(params.as_mut_slice(), &grad) {
                    Ok(()) => {}
                    Err(OptimError::NonFiniteGradient { .. }) => {
                        diverged_at = Some(k);
                        break;
                    }
                    Err(e) => return Err(e.into()),
                }
                iterations_run = k + 1;
            }
        }
        OptimizerChoice::Lbfgs { memory } => {
            let mut lbfgs = LbfgsState::new(memory);
            for k in 0..config.iterations {
                if k % config.cadence == 0 {
                    match ev.evaluate(params.as_slice(), None) {
                        Ok(terms) => history.push(HistoryEntry { iteration: k, terms }),
                        Err(TrainError::NonFinite) => {
                            diverged_at = Some(k);
                            break;
                        }
                        Err(e) => return Err(e),
                    }
                }
                let step = lbfgs.step::<TrainError, _>(params.as_mut_slice(), |p| {
                    let (t, g) = ev.loss_and_grad(p)?;
                    Ok((t.total, g))
                });
                match step {
                    Ok(LbfgsStep::Accepted { .. }) => iterations_run = k + 1,
                    Ok(LbfgsStep::Stalled { .. }) => break,
                    Err(TrainError::NonFinite) | Err(TrainError::Optim(OptimError::NonFiniteGradient { .. })) => {
                        diverged_at = Some(k);
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }

    let final_loss = match ev.evaluate(params.as_slice(), None) {
        Ok(t) => t,
        Err(TrainError::NonFinite) => {
            diverged_at.get_or_insert(iterations_run);
            LossTerms { initial: f64::NAN, boundary: f64::NAN, residual: f64::NAN, total: f64::NAN }
        }
        Err(e) => return Err(e),
    };
    if history.is_empty() {
        history.push(HistoryEntry { iteration: 0, terms: final_loss });
    }

    let (mut prediction, mut rmse_oracle, mut rmse_fd) = (None, None, None);
    if let (Some(r), None) = (refs, diverged_at) {
        let pred = evaluate_on_grid(&config.net, params.as_slice(), &r.space, &r.times)?;
        if let Some(o) = &r.oracle {
            rmse_oracle = Some(Rmse::between(&pred, o)?);
        }
        if let Some(fd) = r.fd.as_ref().filter(|g| g.diverged_at.is_none()) {
            rmse_fd = Some(Rmse::between(&pred, fd)?);
        }
        prediction = Some(pred);
    }
    Ok(TrainReport {
        history,
        final_loss,
        seconds: clock.now() - start,
        params,
        iterations_run,
        diverged_at,
        prediction,
        rmse_oracle,
        rmse_fd,
    })
}

#[cfg(test)]
mod tests;
