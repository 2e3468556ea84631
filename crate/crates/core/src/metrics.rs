//! Regression metrics: MAE, RMSE, MAPE, R² and (for evidential models) MAU.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Targets with |t| below this value (in target units) are left out of MAPE.
pub const DEFAULT_MAPE_FLOOR: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mae: f64,
    pub rmse: f64,
    /// Percent. Absent when every target fell below the MAPE floor.
    pub mape: Option<f64>,
    /// Absent when the targets have zero variance.
    pub r2: Option<f64>,
    /// Mean predicted uncertainty, evidential models only.
    pub mau: Option<f64>,
    pub n: usize,
    /// Targets skipped by MAPE because |t| was below the floor.
    pub mape_excluded: usize,
}

pub fn compute_metrics(predicted: &[f64], target: &[f64], uncertainty: Option<&[f64]>) -> Result<MetricsReport> {
    compute_metrics_with_floor(predicted, target, uncertainty, DEFAULT_MAPE_FLOOR)
}

pub fn compute_metrics_with_floor(
    predicted: &[f64],
    target: &[f64],
    uncertainty: Option<&[f64]>,
    mape_floor: f64,
) -> Result<MetricsReport> {
    if predicted.len() != target.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: target.len(),
        });
    }
    if let Some(u) = uncertainty {
        if u.len() != target.len() {
            return Err(Error::LengthMismatch {
                left: u.len(),
                right: target.len(),
            });
        }
    }
    if target.is_empty() {
        return Err(Error::Empty("metrics input"));
    }
    let n = target.len() as f64;

    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    let mut pct_sum = 0.0;
    let mut pct_n = 0usize;
    for (&p, &t) in predicted.iter().zip(target) {
        let e = p - t;
        abs_sum += e.abs();
        sq_sum += e * e;
        if t.abs() >= mape_floor {
            pct_sum += (e / t).abs();
            pct_n += 1;
        }
    }

    let mean_t = target.iter().sum::<f64>() / n;
    let sst: f64 = target.iter().map(|t| (t - mean_t).powi(2)).sum();
    let r2 = (sst > 0.0).then(|| 1.0 - sq_sum / sst);

    Ok(MetricsReport {
        mae: abs_sum / n,
        rmse: (sq_sum / n).sqrt(),
        mape: (pct_n > 0).then(|| 100.0 * pct_sum / pct_n as f64),
        r2,
        mau: uncertainty.map(|u| u.iter().sum::<f64>() / n),
        n: target.len(),
        mape_excluded: target.len() - pct_n,
    })
}
