use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::params::Workspace;
use super::{AdamState, ModelParams, NetworkConfig, NnError, Scalar, TrainConfig};
use crate::dataset::Dataset;
use crate::domain::{build_domain, DomainId, DomainSchema};
use crate::seed::rng;

/// Min-max scaling to `[0, 1]`: `(raw - offset) / scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaling {
    pub offset: f64,
    pub scale: f64,
}

impl FeatureScaling {
    /// Scaling from the schema's declared ranges, not observed data.
    pub fn from_schema(schema: &DomainSchema) -> Vec<FeatureScaling> {
        schema
            .features()
            .iter()
            .map(|f| {
                let (lo, hi) = f.bounds();
                FeatureScaling {
                    offset: lo as f64,
                    scale: if hi > lo { (hi - lo) as f64 } else { 1.0 },
                }
            })
            .collect()
    }
}

/// `(step, batch loss)` samples recorded during training.
pub type LossTrace = Vec<(usize, f64)>;

/// A trained network bound to its domain. It accepts raw case values only
/// and applies its stored scaling exactly once per evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel<T> {
    pub domain: DomainId,
    pub config: NetworkConfig,
    pub train_config: TrainConfig,
    scaling: Vec<FeatureScaling>,
    params: ModelParams<T>,
}

impl<T: Scalar> TrainedModel<T> {
    pub fn new(
        domain: DomainId,
        config: NetworkConfig,
        train_config: TrainConfig,
        scaling: Vec<FeatureScaling>,
        params: ModelParams<T>,
    ) -> Result<Self, NnError> {
        if scaling.len() != config.input_width || !params.matches(&config) {
            return Err(NnError::ShapeMismatch);
        }
        if scaling
            .iter()
            .any(|s| !(s.scale > 0.0) || !s.offset.is_finite() || !s.scale.is_finite())
        {
            return Err(NnError::InvalidConfig(
                "feature scales must be positive".into(),
            ));
        }
        if !params.all_finite() {
            return Err(NnError::NonFiniteParameter);
        }
        Ok(TrainedModel {
            domain,
            config,
            train_config,
            scaling,
            params,
        })
    }

    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    pub fn scaling(&self) -> &[FeatureScaling] {
        &self.scaling
    }

    fn encode_into(&self, raw: &[i64], out: &mut [T]) -> Result<(), NnError> {
        if raw.len() != self.scaling.len() {
            return Err(NnError::WidthMismatch {
                expected: self.scaling.len(),
                got: raw.len(),
            });
        }
        for ((o, &v), s) in out.iter_mut().zip(raw).zip(&self.scaling) {
            *o = T::of((v as f64 - s.offset) / s.scale);
        }
        Ok(())
    }

    /// Output probability for raw case values.
    pub fn forward(&self, raw: &[i64]) -> Result<T, NnError> {
        let mut x = vec![T::zero(); self.scaling.len()];
        self.encode_into(raw, &mut x)?;
        self.params.forward(&x)
    }

    /// Positive iff the output is at least 0.5; an output of exactly 0.5
    /// counts as positive.
    pub fn predict(&self, raw: &[i64]) -> Result<bool, NnError> {
        Ok(self.forward(raw)? >= T::of(0.5))
    }

    /// Outputs for many cases, reusing one scratch buffer.
    pub fn forward_many<'a>(
        &self,
        rows: impl IntoIterator<Item = &'a [i64]>,
    ) -> Result<Vec<f64>, NnError> {
        let mut x = vec![T::zero(); self.scaling.len()];
        let mut ws = Workspace::new(&self.params);
        rows.into_iter()
            .map(|raw| {
                self.encode_into(raw, &mut x)?;
                let z = self.params.logit_with(&x, &mut ws);
                Ok(super::sigmoid(z).to_f64().expect("finite output"))
            })
            .collect()
    }
}

/// Trains a fresh network on `dataset`.
///
/// Features are scaled by the schema ranges, then `train_config` gradient
/// updates run over mini-batches drawn from a seeded permutation that is
/// reshuffled after every full pass. The last batch of a pass may be short.
pub fn train<T: Scalar>(
    dataset: &Dataset,
    network: &NetworkConfig,
    train_config: &TrainConfig,
) -> Result<(TrainedModel<T>, LossTrace), NnError> {
    train_config.validate()?;
    let schema = build_domain(dataset.domain());
    if network.input_width != schema.width() {
        return Err(NnError::WidthMismatch {
            expected: schema.width(),
            got: network.input_width,
        });
    }
    if dataset.is_empty() || dataset.cases.iter().any(|c| c.label.is_none()) {
        return Err(NnError::EmptyDataset);
    }
    let scaling = FeatureScaling::from_schema(&schema);
    let params = ModelParams::<T>::init(network);
    let mut model = TrainedModel::new(
        dataset.domain(),
        network.clone(),
        train_config.clone(),
        scaling,
        params,
    )?;

    let width = schema.width();
    let n = dataset.len();
    let mut inputs = vec![T::zero(); n * width];
    for (case, row) in dataset.cases.iter().zip(inputs.chunks_mut(width)) {
        model.encode_into(&case.values, row)?;
    }
    let labels: Vec<T> = dataset
        .cases
        .iter()
        .map(|c| {
            if c.label == Some(true) {
                T::one()
            } else {
                T::zero()
            }
        })
        .collect();

    let mut order: Vec<usize> = (0..n).collect();
    let mut shuffle = rng(train_config.shuffle_seed);
    order.shuffle(&mut shuffle);
    let mut cursor = 0;

    let mut adam = AdamState::new(&model.params);
    let mut grads = model.params.zeros_like();
    let mut ws = Workspace::new(&model.params);
    let total = train_config.total_steps(n);
    let mut trace = Vec::with_capacity(total / train_config.trace_every + 1);
    let l2 = T::of(train_config.l2);
    let mut pass_loss = 0.0;
    let mut best = f64::INFINITY;
    let mut stale = 0;
    let mut last_loss = None;

    for step in 1..=total {
        if cursor >= n {
            if let Some(rule) = train_config.plateau_stop {
                let mean = pass_loss / n as f64;
                if mean > best - rule.tolerance {
                    stale += 1;
                } else {
                    stale = 0;
                }
                best = best.min(mean);
                pass_loss = 0.0;
                if stale > rule.patience {
                    break;
                }
            }
            order.shuffle(&mut shuffle);
            cursor = 0;
        }
        let end = (cursor + train_config.batch_size).min(n);
        let batch = &order[cursor..end];
        cursor = end;

        grads.iter_mut().for_each(|g| *g = T::zero());
        let rows = batch
            .iter()
            .map(|&i| (&inputs[i * width..(i + 1) * width], labels[i]));
        let mut loss = model
            .params
            .accumulate(rows, batch.len(), &mut ws, &mut grads);
        if train_config.l2 > 0.0 {
            let decay = l2 / T::of(batch.len() as f64);
            let mut sq = T::zero();
            for (layer, grad) in model.params.layers.iter().zip(grads.layers.iter_mut()) {
                for (&w, g) in layer.weights.iter().zip(grad.weights.iter_mut()) {
                    *g += decay * w;
                    sq += w * w;
                }
            }
            loss += decay * sq / T::of(2.0);
        }
        if !loss.is_finite() {
            return Err(NnError::NonFiniteLoss { step });
        }
        let loss = loss.to_f64().expect("finite loss");
        pass_loss += loss * batch.len() as f64;
        last_loss = Some((step, loss));
        adam.step(
            &mut model.params,
            &grads,
            train_config.learning_rate,
            &train_config.adam,
        );
        if step % train_config.trace_every == 0 || step == total {
            trace.push((step, loss));
        }
    }
    if let Some(last) = last_loss.filter(|l| trace.last() != Some(l)) {
        trace.push(last);
    }
    if !model.params.all_finite() {
        return Err(NnError::NonFiniteParameter);
    }
    Ok((model, trace))
}
