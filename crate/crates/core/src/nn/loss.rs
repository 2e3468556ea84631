use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::mlp::{Gradients, Head, MlpModel};
use crate::error::{Error, Result};
use crate::evidential::evidential_terms;

/// Data-fit term of the training loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum DataLoss {
    /// Mean absolute error on output column 0.
    Mae,
    /// Mean NIG negative log-likelihood plus `lambda` times the evidence
    /// regularizer, on a four-column head.
    Evidential { lambda: f64 },
}

/// Full training objective: data term plus an optional physics residual
/// mean|out₀ − physics target| scaled by `physics_weight`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub data: DataLoss,
    pub physics_weight: Option<f64>,
}

impl Objective {
    pub const MAE: Objective = Objective {
        data: DataLoss::Mae,
        physics_weight: None,
    };

    pub fn pinn(physics_weight: f64) -> Self {
        Objective {
            data: DataLoss::Mae,
            physics_weight: Some(physics_weight),
        }
    }

    pub fn evidential(lambda: f64) -> Self {
        Objective {
            data: DataLoss::Evidential { lambda },
            physics_weight: None,
        }
    }

    /// Same physics term with a data loss that fits `head`; an evidential
    /// head gets the default regularizer weight.
    pub fn with_head(self, head: Head) -> Self {
        let data = match (self.data, head) {
            (DataLoss::Evidential { .. }, Head::Point) => DataLoss::Mae,
            (DataLoss::Mae, Head::Evidential) => DataLoss::Evidential {
                lambda: crate::evidential::DEFAULT_LAMBDA,
            },
            (d, _) => d,
        };
        Objective { data, ..self }
    }

    fn check_head(&self, head: Head) -> Result<()> {
        match (self.data, head) {
            (DataLoss::Mae, Head::Point) | (DataLoss::Evidential { .. }, Head::Evidential) => Ok(()),
            _ => Err(Error::Config(format!("loss {:?} does not match head {head:?}", self.data))),
        }
    }
}

/// Standardized inputs with their targets; `physics` carries the
/// physics-implied targets on the same scale.
#[derive(Debug, Clone, Copy)]
pub struct Batch<'a> {
    pub inputs: ArrayView2<'a, f64>,
    pub targets: ArrayView1<'a, f64>,
    pub physics: Option<ArrayView1<'a, f64>>,
}

impl Batch<'_> {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossParts {
    pub total: f64,
    pub data: f64,
    /// mean|out₀ − physics target|, reported whenever physics targets exist.
    pub phys: Option<f64>,
    /// mean|out₀ − target|; equals `data` for the MAE loss.
    pub mae: f64,
}

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Loss of `out` against the batch targets, and optionally dL/d(out).
pub(crate) fn output_loss(
    objective: &Objective,
    out: &Array2<f64>,
    batch: &Batch<'_>,
    with_grad: bool,
) -> Result<(LossParts, Option<Array2<f64>>)> {
    let n = batch.len();
    if n == 0 {
        return Err(Error::Empty("loss batch"));
    }
    if out.nrows() != n {
        return Err(Error::LengthMismatch { left: out.nrows(), right: n });
    }
    let inv_n = 1.0 / n as f64;
    let mut grad = with_grad.then(|| Array2::zeros(out.raw_dim()));

    let mut mae = 0.0;
    for (o, y) in out.column(0).iter().zip(batch.targets) {
        mae += (o - y).abs();
    }
    mae *= inv_n;

    let data = match objective.data {
        DataLoss::Mae => {
            if let Some(g) = grad.as_mut() {
                for ((gi, o), y) in g.column_mut(0).iter_mut().zip(out.column(0)).zip(batch.targets) {
                    *gi = sign(o - y) * inv_n;
                }
            }
            mae
        }
        DataLoss::Evidential { lambda } => {
            if out.ncols() != 4 {
                return Err(Error::InvalidShape("evidential loss needs four output columns".into()));
            }
            let mut sum = 0.0;
            for (i, (row, &y)) in out.rows().into_iter().zip(batch.targets).enumerate() {
                let t = evidential_terms([row[0], row[1], row[2], row[3]], y, lambda);
                sum += t.nll + lambda * t.reg;
                if let Some(g) = grad.as_mut() {
                    for k in 0..4 {
                        g[[i, k]] = t.grad_raw[k] * inv_n;
                    }
                }
            }
            sum * inv_n
        }
    };

    let phys = batch.physics.map(|ph| {
        if ph.len() != n {
            return Err(Error::LengthMismatch { left: ph.len(), right: n });
        }
        Ok(out.column(0).iter().zip(ph).map(|(o, p)| (o - p).abs()).sum::<f64>() * inv_n)
    });
    let phys = phys.transpose()?;

    let mut total = data;
    match (objective.physics_weight, batch.physics) {
        (Some(w), Some(ph)) if w != 0.0 => {
            total += w * phys.expect("computed above");
            if let Some(g) = grad.as_mut() {
                for ((gi, o), p) in g.column_mut(0).iter_mut().zip(out.column(0)).zip(ph) {
                    *gi += w * sign(o - p) * inv_n;
                }
            }
        }
        (Some(w), None) if w != 0.0 => {
            return Err(Error::Config("physics term requested but the batch has no physics targets".into()));
        }
        _ => {}
    }

    if !total.is_finite() {
        return Err(Error::NonFiniteLoss { start: 0, end: n });
    }
    Ok((LossParts { total, data, phys, mae }, grad))
}

/// Batch loss and the gradient for every weight and bias.
pub fn loss_and_gradients(model: &MlpModel, batch: &Batch<'_>, objective: &Objective) -> Result<(LossParts, Gradients)> {
    objective.check_head(model.head)?;
    let cache = model.forward_cached(batch.inputs);
    let (parts, d_out) = output_loss(objective, &cache.output, batch, true)?;
    let grads = model.backward(batch.inputs, &cache, d_out.expect("gradient requested"));
    Ok((parts, grads))
}

/// Batch loss without gradients.
pub fn batch_loss(model: &MlpModel, batch: &Batch<'_>, objective: &Objective) -> Result<LossParts> {
    objective.check_head(model.head)?;
    let out = model.forward_batch(batch.inputs);
    Ok(output_loss(objective, &out, batch, false)?.0)
}
