use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::{batch_loss, loss_and_gradients, Batch, DataLoss, LossParts, Objective};
use super::mlp::MlpModel;
use super::optim::{Adam, AdamConfig, PlateauConfig, PlateauScheduler};
use crate::error::{Error, Result};
use crate::evidential::DEFAULT_LAMBDA;

/// Rows per chunk when evaluating a full split.
const EVAL_CHUNK: usize = 8192;

/// Standardized training matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub inputs: Array2<f64>,
    pub targets: Array1<f64>,
    pub physics: Option<Array1<f64>>,
}

impl Samples {
    pub fn new(inputs: Array2<f64>, targets: Array1<f64>, physics: Option<Array1<f64>>) -> Result<Self> {
        if inputs.nrows() != targets.len() {
            return Err(Error::LengthMismatch {
                left: inputs.nrows(),
                right: targets.len(),
            });
        }
        if let Some(p) = &physics {
            if p.len() != targets.len() {
                return Err(Error::LengthMismatch {
                    left: p.len(),
                    right: targets.len(),
                });
            }
        }
        Ok(Samples {
            inputs,
            targets,
            physics,
        })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn view(&self) -> Batch<'_> {
        Batch {
            inputs: self.inputs.view(),
            targets: self.targets.view(),
            physics: self.physics.as_ref().map(|p| p.view()),
        }
    }

    pub fn slice(&self, start: usize, end: usize) -> Batch<'_> {
        Batch {
            inputs: self.inputs.slice(ndarray::s![start..end, ..]),
            targets: self.targets.slice(ndarray::s![start..end]),
            physics: self.physics.as_ref().map(|p| p.slice(ndarray::s![start..end])),
        }
    }

    /// Copies the given rows, in order.
    pub fn gather(&self, idx: &[usize]) -> Samples {
        Samples {
            inputs: self.inputs.select(Axis(0), idx),
            targets: self.targets.select(Axis(0), idx),
            physics: self.physics.as_ref().map(|p| p.select(Axis(0), idx)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    #[default]
    Mae,
    Evidential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub plateau: PlateauConfig,
    pub adam: AdamConfig,
    pub loss_kind: LossKind,
    pub lambda_evi: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 150,
            batch_size: 128,
            learning_rate: 1e-3,
            plateau: PlateauConfig::default(),
            adam: AdamConfig::default(),
            loss_kind: LossKind::Mae,
            lambda_evi: DEFAULT_LAMBDA,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn objective(&self, physics_weight: Option<f64>) -> Objective {
        Objective {
            data: match self.loss_kind {
                LossKind::Mae => DataLoss::Mae,
                LossKind::Evidential => DataLoss::Evidential {
                    lambda: self.lambda_evi,
                },
            },
            physics_weight,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch_size must be positive".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate {} is invalid", self.learning_rate)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean objective over the epoch's minibatches.
    pub train_loss: f64,
    /// Objective on the validation split after the epoch.
    pub val_loss: f64,
    /// Learning rate used during the epoch.
    pub lr: f64,
    pub l_data: f64,
    pub l_phys: Option<f64>,
    /// Standardized validation MAE; this is what the scheduler monitors.
    pub val_mae: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
}

impl History {
    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    pub fn last(&self) -> Option<&EpochRecord> {
        self.epochs.last()
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("epoch,train_loss,val_loss,lr,l_data,l_phys,val_mae\n");
        for e in &self.epochs {
            let phys = e.l_phys.map(|p| p.to_string()).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                e.epoch, e.train_loss, e.val_loss, e.lr, e.l_data, phys, e.val_mae
            );
        }
        s
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }
}

/// Objective over a whole split, evaluated in fixed-size chunks and
/// averaged with chunk weights.
pub fn evaluate_loss(model: &MlpModel, samples: &Samples, objective: &Objective) -> Result<LossParts> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::Empty("evaluation split"));
    }
    let mut acc = LossParts {
        total: 0.0,
        data: 0.0,
        phys: samples.physics.as_ref().map(|_| 0.0),
        mae: 0.0,
    };
    let mut start = 0;
    while start < n {
        let end = (start + EVAL_CHUNK).min(n);
        let w = (end - start) as f64 / n as f64;
        let parts = batch_loss(model, &samples.slice(start, end), objective).map_err(|e| match e {
            Error::NonFiniteLoss { start: s, end: t } => Error::NonFiniteLoss {
                start: start + s,
                end: start + t,
            },
            other => other,
        })?;
        acc.total += w * parts.total;
        acc.data += w * parts.data;
        acc.mae += w * parts.mae;
        if let (Some(a), Some(p)) = (acc.phys.as_mut(), parts.phys) {
            *a += w * p;
        }
        start = end;
    }
    Ok(acc)
}

/// Minibatch training with seeded reshuffling, Adam updates and a plateau
/// learning-rate schedule driven by the validation MAE.
pub fn train(
    model: &mut MlpModel,
    train_set: &Samples,
    val_set: &Samples,
    config: &TrainConfig,
    physics_weight: Option<f64>,
) -> Result<History> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::Empty("training split"));
    }
    if val_set.is_empty() {
        return Err(Error::Empty("validation split"));
    }
    let objective = config.objective(physics_weight);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut adam = Adam::new(model, config.adam);
    let mut scheduler = PlateauScheduler::new(config.learning_rate, config.plateau);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = History::default();

    for epoch in 1..=config.epochs {
        let lr = scheduler.lr();
        order.shuffle(&mut rng);
        let (mut total, mut data, mut phys) = (0.0, 0.0, 0.0);
        let mut pos = 0;
        for chunk in order.chunks(config.batch_size) {
            let batch = train_set.gather(chunk);
            let (parts, grads) = loss_and_gradients(model, &batch.view(), &objective).map_err(|e| match e {
                Error::NonFiniteLoss { .. } => Error::NonFiniteLoss {
                    start: pos,
                    end: pos + chunk.len(),
                },
                other => other,
            })?;
            adam.step(model, &grads, lr);
            let w = chunk.len() as f64;
            total += w * parts.total;
            data += w * parts.data;
            phys += w * parts.phys.unwrap_or(0.0);
            pos += chunk.len();
        }
        let n = train_set.len() as f64;
        let val = match evaluate_loss(model, val_set, &objective) {
            Ok(v) if v.total.is_finite() && model.is_finite() => v,
            _ => return Err(Error::Diverged { epoch, history }),
        };
        history.epochs.push(EpochRecord {
            epoch,
            train_loss: total / n,
            val_loss: val.total,
            lr,
            l_data: data / n,
            l_phys: train_set.physics.as_ref().map(|_| phys / n),
            val_mae: val.mae,
        });
        log::debug!("epoch {epoch}: train {:.6} val {:.6} lr {lr:e}", total / n, val.total);
        scheduler.observe(val.mae);
    }
    Ok(history)
}
