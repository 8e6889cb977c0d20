use rand::Rng as _;

use super::{sigmoid, softplus, NetworkConfig, NnError, Scalar};
use crate::seed::rng;

/// One dense layer. `weights` is `fan_in x fan_out`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer<T> {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Scalar> Layer<T> {
    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Layer {
            fan_in,
            fan_out,
            weights: vec![T::zero(); fan_in * fan_out],
            bias: vec![T::zero(); fan_out],
        }
    }

    pub fn weight(&self, i: usize, j: usize) -> T {
        self.weights[i * self.fan_out + j]
    }

    fn forward_into(&self, input: &[T], out: &mut [T]) {
        out.copy_from_slice(&self.bias);
        for (i, &a) in input.iter().enumerate() {
            let row = &self.weights[i * self.fan_out..(i + 1) * self.fan_out];
            for (o, &w) in out.iter_mut().zip(row) {
                *o += a * w;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    pub layers: Vec<Layer<T>>,
}

/// Per-layer activations reused across samples.
pub(crate) struct Workspace<T> {
    acts: Vec<Vec<T>>,
    deltas: Vec<Vec<T>>,
}

impl<T: Scalar> Workspace<T> {
    pub(crate) fn new(params: &ModelParams<T>) -> Self {
        let mut acts = vec![vec![T::zero(); params.input_width()]];
        acts.extend(params.layers.iter().map(|l| vec![T::zero(); l.fan_out]));
        let deltas = params
            .layers
            .iter()
            .map(|l| vec![T::zero(); l.fan_out])
            .collect();
        Workspace { acts, deltas }
    }
}

impl<T: Scalar> ModelParams<T> {
    /// Fan-balanced uniform initialization: each layer's weights are drawn
    /// from `[-b, b]` with `b = sqrt(6 / (fan_in + fan_out))`; biases start
    /// at zero.
    pub fn init(config: &NetworkConfig) -> Self {
        let mut rng = rng(config.init_seed);
        let layers = config
            .layer_shapes()
            .into_iter()
            .map(|(fan_in, fan_out)| {
                let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let mut layer = Layer::zeros(fan_in, fan_out);
                for w in &mut layer.weights {
                    *w = T::of(rng.gen_range(-bound..=bound));
                }
                layer
            })
            .collect();
        ModelParams { layers }
    }

    pub fn zeros(config: &NetworkConfig) -> Self {
        ModelParams {
            layers: config
                .layer_shapes()
                .into_iter()
                .map(|(i, o)| Layer::zeros(i, o))
                .collect(),
        }
    }

    pub fn zeros_like(&self) -> Self {
        ModelParams {
            layers: self
                .layers
                .iter()
                .map(|l| Layer::zeros(l.fan_in, l.fan_out))
                .collect(),
        }
    }

    pub fn input_width(&self) -> usize {
        self.layers.first().map_or(0, |l| l.fan_in)
    }

    pub fn shapes(&self) -> Vec<(usize, usize)> {
        self.layers.iter().map(|l| (l.fan_in, l.fan_out)).collect()
    }

    pub fn matches(&self, config: &NetworkConfig) -> bool {
        self.shapes() == config.layer_shapes()
            && self
                .layers
                .iter()
                .all(|l| l.weights.len() == l.fan_in * l.fan_out && l.bias.len() == l.fan_out)
    }

    pub fn len(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every parameter, layer by layer, weights before biases.
    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
    }

    pub fn all_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }

    fn check_input(&self, x: &[T]) -> Result<(), NnError> {
        if x.len() != self.input_width() {
            return Err(NnError::WidthMismatch {
                expected: self.input_width(),
                got: x.len(),
            });
        }
        if let Some(index) = x.iter().position(|v| !v.is_finite()) {
            return Err(NnError::NonFiniteInput { index });
        }
        Ok(())
    }

    /// Pre-sigmoid output of the final unit.
    pub fn logit(&self, x: &[T]) -> Result<T, NnError> {
        self.check_input(x)?;
        let mut ws = Workspace::new(self);
        Ok(self.logit_with(x, &mut ws))
    }

    /// Network output in (0, 1) for an already-scaled input.
    pub fn forward(&self, x: &[T]) -> Result<T, NnError> {
        self.logit(x).map(sigmoid)
    }

    pub(crate) fn logit_with(&self, x: &[T], ws: &mut Workspace<T>) -> T {
        ws.acts[0].copy_from_slice(x);
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let (before, after) = ws.acts.split_at_mut(l + 1);
            let out = &mut after[0];
            layer.forward_into(&before[l], out);
            if l < last {
                for v in out.iter_mut() {
                    *v = sigmoid(*v);
                }
            }
        }
        ws.acts[last + 1][0]
    }

    /// Mean binary cross-entropy over `batch` and its gradient.
    pub fn loss_and_grads(&self, batch: &[(&[T], T)]) -> Result<(T, ModelParams<T>), NnError> {
        if batch.is_empty() {
            return Err(NnError::EmptyBatch);
        }
        for (x, y) in batch {
            self.check_input(x)?;
            if *y != T::zero() && *y != T::one() {
                return Err(NnError::BadLabel(y.to_f64().unwrap_or(f64::NAN)));
            }
        }
        let mut grads = self.zeros_like();
        let mut ws = Workspace::new(self);
        let loss = self.accumulate(batch.iter().copied(), batch.len(), &mut ws, &mut grads);
        Ok((loss, grads))
    }

    /// Adds the batch-mean gradient into `grads` (which the caller zeroes)
    /// and returns the batch-mean loss. Inputs are trusted.
    pub(crate) fn accumulate<'a>(
        &self,
        batch: impl Iterator<Item = (&'a [T], T)>,
        n: usize,
        ws: &mut Workspace<T>,
        grads: &mut ModelParams<T>,
    ) -> T {
        let inv_n = T::one() / T::from_usize(n).expect("batch size fits");
        let mut loss = T::zero();
        let depth = self.layers.len();
        for (x, y) in batch {
            let z = self.logit_with(x, ws);
            loss += softplus(z) - y * z;
            ws.deltas[depth - 1][0] = (sigmoid(z) - y) * inv_n;
            for l in (0..depth).rev() {
                let layer = &self.layers[l];
                let grad = &mut grads.layers[l];
                let input = &ws.acts[l];
                let (lower, upper) = ws.deltas.split_at_mut(l);
                let delta = &upper[0];
                for (g, &d) in grad.bias.iter_mut().zip(delta) {
                    *g += d;
                }
                for (i, &a) in input.iter().enumerate() {
                    let row = &mut grad.weights[i * layer.fan_out..(i + 1) * layer.fan_out];
                    for (g, &d) in row.iter_mut().zip(delta) {
                        *g += a * d;
                    }
                }
                if l > 0 {
                    let prev = &mut lower[l - 1];
                    for (i, p) in prev.iter_mut().enumerate() {
                        let row = &layer.weights[i * layer.fan_out..(i + 1) * layer.fan_out];
                        let back = row
                            .iter()
                            .zip(delta)
                            .fold(T::zero(), |s, (&w, &d)| s + w * d);
                        let a = input[i];
                        *p = back * a * (T::one() - a);
                    }
                }
            }
        }
        loss * inv_n
    }
}
