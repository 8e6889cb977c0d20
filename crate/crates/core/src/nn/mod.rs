//! Feed-forward sigmoid networks trained with Adam on binary cross-entropy.
//!
//! The math is generic over [`Scalar`] (`f32` or `f64`); the crate root
//! exports `f64` aliases.

mod adam;
mod params;
mod persist;
mod train;

use std::fmt::Debug;
use std::ops::{AddAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use adam::{AdamConfig, AdamState};
pub use params::{Layer, ModelParams};
pub use persist::{load_model, save_model, MODEL_FORMAT_VERSION, MODEL_MAGIC};
pub use train::{train, FeatureScaling, LossTrace, TrainedModel};

pub trait Scalar:
    Float + FromPrimitive + AddAssign + SubAssign + MulAssign + Debug + Send + Sync + 'static
{
    /// Converts a configuration constant.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("representable constant")
    }

    const NAME: &'static str;
}

impl Scalar for f32 {
    const NAME: &'static str = "f32";
}

impl Scalar for f64 {
    const NAME: &'static str = "f64";
}

pub fn sigmoid<T: Scalar>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

/// `ln(1 + e^z)` without overflow.
pub fn softplus<T: Scalar>(z: T) -> T {
    z.max(T::zero()) + (-z.abs()).exp().ln_1p()
}

#[derive(Debug, Error)]
pub enum NnError {
    #[error("input has {got} values, network expects {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("input value {index} is not finite")]
    NonFiniteInput { index: usize },
    #[error("training diverged: non-finite loss at step {step}")]
    NonFiniteLoss { step: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("label {0} is not 0 or 1")]
    BadLabel(f64),
    #[error("training dataset is empty or unlabeled")]
    EmptyDataset,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parameter shapes do not match the network configuration")]
    ShapeMismatch,
    #[error("non-finite parameter")]
    NonFiniteParameter,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed model file: {0}")]
    Format(String),
}

/// Hidden-layer widths of the three published architectures.
pub const PUBLISHED_SHAPES: [&[usize]; 3] = [&[12], &[24, 6], &[24, 10, 3]];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub input_width: usize,
    pub hidden_layers: Vec<usize>,
    #[serde(default)]
    pub init_seed: u64,
}

impl NetworkConfig {
    /// One of the published shapes.
    pub fn published(
        input_width: usize,
        hidden_layers: &[usize],
        init_seed: u64,
    ) -> Result<Self, NnError> {
        if !PUBLISHED_SHAPES.contains(&hidden_layers) {
            return Err(NnError::InvalidConfig(format!(
                "hidden layers {hidden_layers:?} are not one of the published shapes"
            )));
        }
        Self::custom(input_width, hidden_layers, init_seed)
    }

    /// Any shape, including no hidden layer at all.
    pub fn custom(
        input_width: usize,
        hidden_layers: &[usize],
        init_seed: u64,
    ) -> Result<Self, NnError> {
        if input_width == 0 || hidden_layers.contains(&0) {
            return Err(NnError::InvalidConfig(
                "layer widths must be positive".into(),
            ));
        }
        Ok(NetworkConfig {
            input_width,
            hidden_layers: hidden_layers.to_vec(),
            init_seed,
        })
    }

    /// `(fan_in, fan_out)` per layer, ending in the single output unit.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut widths = vec![self.input_width];
        widths.extend(&self.hidden_layers);
        widths.push(1);
        widths.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// Shape tag such as `24-10-3`.
    pub fn shape_label(&self) -> String {
        shape_label(&self.hidden_layers)
    }
}

pub fn shape_label(hidden: &[usize]) -> String {
    hidden
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join("-")
}

/// What one unit of `TrainConfig::iterations` means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IterationUnit {
    /// One mini-batch gradient update.
    #[default]
    Steps,
    /// One pass over the training set.
    Epochs,
}

fn default_lr() -> f64 {
    0.001
}
fn default_batch() -> usize {
    50
}
fn default_iterations() -> usize {
    50_000
}
fn default_trace_every() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default)]
    pub iteration_unit: IterationUnit,
    #[serde(default)]
    pub adam: AdamConfig,
    #[serde(default)]
    pub shuffle_seed: u64,
    /// Record the batch loss every this many steps.
    #[serde(default = "default_trace_every")]
    pub trace_every: usize,
    /// Weight decay coefficient; the batch objective gains
    /// `l2 / (2 * batch) * sum(w^2)` over all weights (not biases).
    #[serde(default)]
    pub l2: f64,
    /// Stop once the pass-mean loss has failed to improve for a while.
    #[serde(default)]
    pub plateau_stop: Option<PlateauStop>,
}

/// Stops training after more than `patience` consecutive passes whose mean
/// loss is not below the best seen so far minus `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateauStop {
    pub tolerance: f64,
    pub patience: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: default_lr(),
            batch_size: default_batch(),
            iterations: default_iterations(),
            iteration_unit: IterationUnit::Steps,
            adam: AdamConfig::default(),
            shuffle_seed: 0,
            trace_every: default_trace_every(),
            l2: 0.0,
            plateau_stop: None,
        }
    }
}

impl TrainConfig {
    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn with_shuffle_seed(mut self, seed: u64) -> Self {
        self.shuffle_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), NnError> {
        let bad = |msg: &str| Err(NnError::InvalidConfig(msg.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        if self.iterations == 0 {
            return bad("iterations must be at least 1");
        }
        if self.trace_every == 0 {
            return bad("trace interval must be at least 1");
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return bad("l2 must be a non-negative number");
        }
        if let Some(p) = self.plateau_stop {
            if !(p.tolerance >= 0.0 && p.tolerance.is_finite()) {
                return bad("plateau tolerance must be a non-negative number");
            }
        }
        self.adam.validate()
    }

    /// Number of gradient updates for a training set of `n` cases.
    pub fn total_steps(&self, n: usize) -> usize {
        match self.iteration_unit {
            IterationUnit::Steps => self.iterations,
            IterationUnit::Epochs => self.iterations * n.div_ceil(self.batch_size),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layer_shapes_follow_config() {
        let cfg = NetworkConfig::published(10, &[24, 10, 3], 0).unwrap();
        assert_eq!(cfg.layer_shapes(), [(10, 24), (24, 10), (10, 3), (3, 1)]);
        assert_eq!(cfg.shape_label(), "24-10-3");
        assert!(NetworkConfig::published(4, &[7], 0).is_err());
        assert!(NetworkConfig::custom(1, &[], 0).is_ok());
    }

    #[test]
    fn train_config_defaults() {
        let cfg = TrainConfig::default();
        assert_eq!(cfg.learning_rate, 0.001);
        assert_eq!(cfg.batch_size, 50);
        assert_eq!(cfg.iterations, 50_000);
        assert_eq!(
            (cfg.adam.beta1, cfg.adam.beta2, cfg.adam.epsilon),
            (0.9, 0.999, 1e-8)
        );
        let parsed: TrainConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(parsed, cfg);
        assert!(cfg.clone().with_iterations(0).validate().is_err());
    }

    #[test]
    fn epoch_unit_counts_batches() {
        let cfg = TrainConfig {
            iteration_unit: IterationUnit::Epochs,
            iterations: 3,
            ..TrainConfig::default()
        };
        assert_eq!(cfg.total_steps(1024), 3 * 21);
    }

    #[test]
    fn stable_softplus() {
        assert!((softplus(0.0f64) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(softplus(1000.0f64), 1000.0);
        assert!(softplus(-1000.0f64) >= 0.0);
        assert_eq!(sigmoid(0.0f32), 0.5);
    }
}
