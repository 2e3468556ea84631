use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::Objective;
use super::mlp::{Activation, MlpModel};
use super::train::{evaluate_loss, train, Samples, TrainConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpace {
    pub n_layers: Vec<usize>,
    pub n_neurons: Vec<usize>,
    pub learning_rates: Vec<f64>,
    pub activations: Vec<Activation>,
}

impl GridSpace {
    /// The 3·5·3·2 = 90 combination space.
    pub fn full() -> Self {
        GridSpace {
            n_layers: vec![1, 2, 4],
            n_neurons: vec![8, 16, 32, 64, 128],
            learning_rates: vec![1e-2, 1e-3, 1e-4],
            activations: Activation::ALL.to_vec(),
        }
    }

    pub fn candidates(&self) -> Vec<Candidate> {
        let mut out = Vec::new();
        for &n_layers in &self.n_layers {
            for &n_neurons in &self.n_neurons {
                for &learning_rate in &self.learning_rates {
                    for &activation in &self.activations {
                        out.push(Candidate {
                            n_layers,
                            n_neurons,
                            learning_rate,
                            activation,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub n_layers: usize,
    pub n_neurons: usize,
    pub learning_rate: f64,
    pub activation: Activation,
}

impl Candidate {
    pub fn layer_sizes(&self, input: usize, output: usize) -> Vec<usize> {
        let mut sizes = vec![input];
        sizes.extend(std::iter::repeat_n(self.n_neurons, self.n_layers));
        sizes.push(output);
        sizes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridBudget {
    pub epochs: usize,
    pub batch_size: usize,
    /// Training rows drawn (seeded) from the train split; `None` uses all.
    pub max_train_samples: Option<usize>,
    pub seed: u64,
}

impl Default for GridBudget {
    fn default() -> Self {
        GridBudget {
            epochs: 10,
            batch_size: 128,
            max_train_samples: Some(10_000),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub candidate: Candidate,
    pub val_mae: f64,
    pub parameter_count: usize,
}

/// Trains every candidate on the same subsample with the same seed and
/// returns them sorted by validation MAE (ties keep enumeration order).
/// Candidates whose training diverges rank last with an infinite score.
pub fn grid_search(
    space: &GridSpace,
    train_set: &Samples,
    val_set: &Samples,
    budget: &GridBudget,
) -> Result<Vec<RankedCandidate>> {
    let candidates = space.candidates();
    if candidates.is_empty() {
        return Err(Error::Empty("search space"));
    }
    let subsample;
    let train_set = match budget.max_train_samples {
        Some(k) if k < train_set.len() => {
            let mut idx: Vec<usize> = (0..train_set.len()).collect();
            idx.shuffle(&mut ChaCha8Rng::seed_from_u64(budget.seed));
            idx.truncate(k);
            subsample = train_set.gather(&idx);
            &subsample
        }
        _ => train_set,
    };
    let input = train_set.inputs.ncols();

    let mut ranked = Vec::with_capacity(candidates.len());
    for candidate in candidates {
        let mut model = MlpModel::new(&candidate.layer_sizes(input, 1), candidate.activation, budget.seed)?;
        let config = TrainConfig {
            epochs: budget.epochs,
            batch_size: budget.batch_size,
            learning_rate: candidate.learning_rate,
            seed: budget.seed,
            ..TrainConfig::default()
        };
        let val_mae = match train(&mut model, train_set, val_set, &config, None) {
            Ok(_) => evaluate_loss(&model, val_set, &Objective::MAE)?.mae,
            Err(Error::Diverged { .. }) | Err(Error::NonFiniteLoss { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        log::info!("grid {candidate:?}: val MAE {val_mae:.5}");
        ranked.push(RankedCandidate {
            candidate,
            val_mae,
            parameter_count: model.parameter_count(),
        });
    }
    ranked.sort_by(|a, b| a.val_mae.total_cmp(&b.val_mae));
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_space_size() {
        assert_eq!(GridSpace::full().candidates().len(), 90);
        let c = GridSpace::full().candidates()[0];
        assert_eq!(c.layer_sizes(3, 1), vec![3, 8, 1]);
    }

    #[test]
    fn empty_space_rejected() {
        let s = Samples::new(ndarray::Array2::zeros((2, 1)), ndarray::Array1::zeros(2), None).unwrap();
        let space = GridSpace {
            n_layers: vec![],
            ..GridSpace::full()
        };
        assert!(grid_search(&space, &s, &s, &GridBudget::default()).is_err());
    }
}
