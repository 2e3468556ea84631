use ndarray::Zip;
use serde::{Deserialize, Serialize};

use super::mlp::{Gradients, MlpModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Adaptive-moment optimizer with bias-corrected first and second moments.
#[derive(Debug, Clone)]
pub struct Adam {
    config: AdamConfig,
    step: i32,
    moments: Gradients,
    second: Gradients,
}

impl Adam {
    pub fn new(model: &MlpModel, config: AdamConfig) -> Self {
        Adam {
            config,
            step: 0,
            moments: Gradients::zeros_like(model),
            second: Gradients::zeros_like(model),
        }
    }

    pub fn steps_taken(&self) -> i32 {
        self.step
    }

    pub fn step(&mut self, model: &mut MlpModel, grads: &Gradients, lr: f64) {
        self.step += 1;
        let AdamConfig { beta1, beta2, eps } = self.config;
        let c1 = 1.0 - beta1.powi(self.step);
        let c2 = 1.0 - beta2.powi(self.step);
        let update = |p: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
        };
        for l in 0..model.weights.len() {
            Zip::from(&mut model.weights[l])
                .and(&mut self.moments.weights[l])
                .and(&mut self.second.weights[l])
                .and(&grads.weights[l])
                .for_each(|p, m, v, &g| update(p, m, v, g));
            Zip::from(&mut model.biases[l])
                .and(&mut self.moments.biases[l])
                .and(&mut self.second.biases[l])
                .and(&grads.biases[l])
                .for_each(|p, m, v, &g| update(p, m, v, g));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlateauConfig {
    pub factor: f64,
    pub patience: usize,
    pub min_lr: f64,
}

impl Default for PlateauConfig {
    fn default() -> Self {
        PlateauConfig {
            factor: 0.5,
            patience: 5,
            min_lr: 1e-5,
        }
    }
}

/// Multiplies the learning rate by `factor` after `patience` epochs without
/// a strict improvement of the monitored value, never going below `min_lr`.
#[derive(Debug, Clone)]
pub struct PlateauScheduler {
    config: PlateauConfig,
    lr: f64,
    best: f64,
    wait: usize,
}

impl PlateauScheduler {
    pub fn new(initial_lr: f64, config: PlateauConfig) -> Self {
        PlateauScheduler {
            config,
            lr: initial_lr,
            best: f64::INFINITY,
            wait: 0,
        }
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    /// Records one epoch's monitored value and returns the learning rate for
    /// the next epoch.
    pub fn observe(&mut self, monitored: f64) -> f64 {
        if monitored < self.best {
            self.best = monitored;
            self.wait = 0;
        } else {
            self.wait += 1;
            if self.wait >= self.config.patience {
                let reduced = (self.lr * self.config.factor).max(self.config.min_lr);
                // an initial rate already below the floor is left alone
                self.lr = reduced.min(self.lr);
                self.wait = 0;
            }
        }
        self.lr
    }
}
