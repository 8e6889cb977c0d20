use serde::{Deserialize, Serialize};

use super::{ModelParams, NnError, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<(), NnError> {
        let in_unit = |b: f64| (0.0..1.0).contains(&b);
        if !in_unit(self.beta1) || !in_unit(self.beta2) || !(self.epsilon > 0.0) {
            return Err(NnError::InvalidConfig(
                "adam betas must lie in [0, 1) and epsilon must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// First and second moment estimates, shaped like the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub m: ModelParams<T>,
    pub v: ModelParams<T>,
    /// Number of updates applied so far.
    pub t: u64,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(params: &ModelParams<T>) -> Self {
        AdamState {
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
        }
    }

    /// Applies one bias-corrected Adam update to `params`.
    pub fn step(
        &mut self,
        params: &mut ModelParams<T>,
        grads: &ModelParams<T>,
        learning_rate: f64,
        cfg: &AdamConfig,
    ) {
        self.t += 1;
        let t = i32::try_from(self.t).unwrap_or(i32::MAX);
        let (b1, b2) = (T::of(cfg.beta1), T::of(cfg.beta2));
        let (one, eps, lr) = (T::one(), T::of(cfg.epsilon), T::of(learning_rate));
        let correct1 = one - b1.powi(t);
        let correct2 = one - b2.powi(t);
        let moments = self.m.iter_mut().zip(self.v.iter_mut());
        for ((p, g), (m, v)) in params.iter_mut().zip(grads.iter()).zip(moments) {
            *m = b1 * *m + (one - b1) * *g;
            *v = b2 * *v + (one - b2) * *g * *g;
            let m_hat = *m / correct1;
            let v_hat = *v / correct2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}
