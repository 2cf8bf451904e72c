use ndarray::Zip;
use serde::{Deserialize, Serialize};

use super::{Gradients, MlpParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_learning_rate(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.learning_rate.is_finite()
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.epsilon > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid Adam settings {self:?}")))
        }
    }
}

/// Adam moments and step counter for one network.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub first_moment: Gradients,
    pub second_moment: Gradients,
    pub step: u64,
}

impl AdamState {
    pub fn new(params: &MlpParams, config: AdamConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            first_moment: Gradients::zeros_like(params),
            second_moment: Gradients::zeros_like(params),
            step: 0,
        })
    }

    /// One bias-corrected Adam update of `params` in place.
    ///
    /// Nothing is modified if the shapes disagree or any gradient is not finite.
    pub fn step(&mut self, params: &mut MlpParams, grads: &Gradients) -> Result<()> {
        let shapes_agree = params.layers.len() == grads.layers.len()
            && params.layers.len() == self.first_moment.layers.len()
            && params.layers.iter().zip(&grads.layers).zip(&self.first_moment.layers).all(
                |((p, g), m)| {
                    p.weight.dim() == g.weight.dim()
                        && p.bias.dim() == g.bias.dim()
                        && m.weight.dim() == p.weight.dim()
                        && m.bias.dim() == p.bias.dim()
                },
            );
        if !shapes_agree {
            return Err(Error::ShapeMismatch(
                "gradients, moments and parameters disagree".into(),
            ));
        }
        for (k, g) in grads.layers.iter().enumerate() {
            if g.weight.iter().chain(g.bias.iter()).any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteGradient { layer: k });
            }
        }

        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        self.step += 1;
        let t = self.step as i32;
        let correction1 = 1.0 - beta1.powi(t);
        let correction2 = 1.0 - beta2.powi(t);
        let update = |theta: &mut f64, m: &mut f64, v: &mut f64, g: &f64| {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / correction1;
            let v_hat = *v / correction2;
            *theta -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        };

        for (((p, g), m), v) in params
            .layers
            .iter_mut()
            .zip(&grads.layers)
            .zip(&mut self.first_moment.layers)
            .zip(&mut self.second_moment.layers)
        {
            Zip::from(&mut p.weight)
                .and(&mut m.weight)
                .and(&mut v.weight)
                .and(&g.weight)
                .for_each(update);
            Zip::from(&mut p.bias)
                .and(&mut m.bias)
                .and(&mut v.bias)
                .and(&g.bias)
                .for_each(update);
        }
        Ok(())
    }
}

/// Functional form: returns the updated parameters and state.
pub fn adam_step(
    state: &AdamState,
    params: &MlpParams,
    grads: &Gradients,
) -> Result<(MlpParams, AdamState)> {
    let mut state = state.clone();
    let mut params = params.clone();
    state.step(&mut params, grads)?;
    Ok((params, state))
}
