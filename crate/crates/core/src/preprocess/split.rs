use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    #[default]
    Random,
    /// First records (in file order) go to training.
    Chronological,
}

/// Random train/test partition of the unflagged records.
pub fn split(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    split_with(dataset, train_fraction, seed, SplitMode::Random)
}

pub fn split_with(dataset: &Dataset, train_fraction: f64, seed: u64, mode: SplitMode) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Config(format!("train fraction must lie in (0, 1), got {train_fraction}")));
    }
    let retained: Vec<_> = dataset.retained().copied().collect();
    let n = retained.len();
    if n < 2 {
        return Err(Error::Empty("split needs at least two unflagged records"));
    }
    let n_train = ((n as f64 * train_fraction).round() as usize).clamp(1, n - 1);

    let mut order: Vec<usize> = (0..n).collect();
    if mode == SplitMode::Random {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let (train_idx, test_idx) = order.split_at(n_train);
    let pick = |idx: &[usize], tag: &str| {
        Dataset::new(
            idx.iter().map(|&i| retained[i]).collect(),
            format!("{}[{tag}]", dataset.source_label),
        )
    };
    Ok((pick(train_idx, "train"), pick(test_idx, "test")))
}
