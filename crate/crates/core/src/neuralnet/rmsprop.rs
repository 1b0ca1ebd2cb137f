use ndarray::{Array1, Array2, Zip};
use serde::{Deserialize, Serialize};

use super::{Gradients, Mlp};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmsPropConfig {
    pub learning_rate: f64,
    pub decay: f64,
    pub epsilon: f64,
}

impl Default for RmsPropConfig {
    fn default() -> Self {
        Self { learning_rate: 5e-4, decay: 0.9, epsilon: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Ascend,
    Descend,
}

/// Running averages of squared gradients, shaped like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct RmsPropState {
    pub config: RmsPropConfig,
    weight_cache: Vec<Array2<f64>>,
    bias_cache: Vec<Array1<f64>>,
}

impl RmsPropState {
    pub fn new(m: &Mlp, config: RmsPropConfig) -> Result<Self> {
        if !(config.decay > 0.0 && config.decay < 1.0) {
            return Err(Error::invalid(format!("RMSProp decay must lie in (0,1), got {}", config.decay)));
        }
        if !(config.learning_rate > 0.0) || !(config.epsilon > 0.0) {
            return Err(Error::invalid("RMSProp learning rate and epsilon must be positive"));
        }
        let zeros = Gradients::zeros_like(m);
        Ok(Self { config, weight_cache: zeros.weights, bias_cache: zeros.biases })
    }

    pub fn weight_cache(&self) -> &[Array2<f64>] {
        &self.weight_cache
    }

    pub fn bias_cache(&self) -> &[Array1<f64>] {
        &self.bias_cache
    }
}

/// `cache ← ρ cache + (1-ρ) g²`, `θ ← θ ± lr g / (sqrt(cache) + ε)`.
///
/// Nothing is modified when the gradients contain a non-finite entry.
pub fn rmsprop_step(m: &mut Mlp, grads: &Gradients, state: &mut RmsPropState, direction: Direction) -> Result<()> {
    let shapes_match = grads.weights.len() == m.layers().len()
        && grads.biases.len() == m.layers().len()
        && state.weight_cache.len() == m.layers().len()
        && m.layers().iter().enumerate().all(|(l, layer)| {
            grads.weights[l].dim() == layer.weights.dim()
                && grads.biases[l].len() == layer.bias.len()
                && state.weight_cache[l].dim() == layer.weights.dim()
                && state.bias_cache[l].len() == layer.bias.len()
        });
    if !shapes_match {
        return Err(Error::invalid("gradient or optimizer state shapes do not match the network"));
    }
    if !grads.is_finite() {
        return Err(Error::NonFinite("gradient".into()));
    }
    let RmsPropConfig { learning_rate, decay, epsilon } = state.config;
    let sign = match direction {
        Direction::Ascend => 1.0,
        Direction::Descend => -1.0,
    };
    let update = |p: &mut f64, c: &mut f64, &g: &f64| {
        *c = decay * *c + (1.0 - decay) * g * g;
        *p += sign * learning_rate * g / (c.sqrt() + epsilon);
    };
    for (l, layer) in m.layers_mut().iter_mut().enumerate() {
        Zip::from(&mut layer.weights)
            .and(&mut state.weight_cache[l])
            .and(&grads.weights[l])
            .for_each(update);
        Zip::from(&mut layer.bias)
            .and(&mut state.bias_cache[l])
            .and(&grads.biases[l])
            .for_each(update);
    }
    Ok(())
}
