//! Multilayer perceptron with hand-written reverse-mode gradients, Adam,
//! a plateau learning-rate schedule and the minibatch training loop.

mod grad_check;
mod grid;
mod io;
mod loss;
mod mlp;
mod optim;
mod train;

pub use grad_check::{compare_with_differences, grad_check};
pub use grid::{grid_search, Candidate, GridBudget, GridSpace, RankedCandidate};
pub use io::{load_model, model_from_json, model_to_json, save_model, MODEL_FORMAT_VERSION};
pub use loss::{batch_loss, loss_and_gradients, Batch, DataLoss, LossParts, Objective};
pub use mlp::{Activation, Gradients, Head, MlpModel};
pub use optim::{Adam, AdamConfig, PlateauConfig, PlateauScheduler};
pub use train::{evaluate_loss, train, EpochRecord, History, LossKind, Samples, TrainConfig};

/// Hidden-layer shape used for each target kind by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Architecture {
    pub n_layers: usize,
    pub n_neurons: usize,
    pub activation: Activation,
}

impl Architecture {
    pub fn default_for(kind: crate::target::TargetKind) -> Self {
        use crate::target::TargetKind;
        Architecture {
            n_layers: 2,
            n_neurons: match kind {
                TargetKind::Cp | TargetKind::Torque => 128,
                TargetKind::Power => 64,
            },
            activation: Activation::Relu,
        }
    }

    pub fn layer_sizes(&self, output: usize) -> Vec<usize> {
        let mut sizes = vec![3];
        sizes.extend(std::iter::repeat_n(self.n_neurons, self.n_layers));
        sizes.push(output);
        sizes
    }
}
