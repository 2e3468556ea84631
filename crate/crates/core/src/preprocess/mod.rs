//! SCADA cleaning: physical screening, iterative-median outlier rejection and
//! the low-wind power cutoff, plus standardization and splitting.

mod filters;
mod power_curve;
mod scaler;
mod split;

pub use filters::{filter_outliers, filter_physical, low_wind_cutoff, LowWindReport, OutlierReport, PhysicalReport};
pub use power_curve::{
    estimate_power_curve, median, median_and_sigma, PowerCurveEstimate, DEGENERATE_TOLERANCE_W, MAD_TO_SIGMA,
};
pub use scaler::{fit_scaler, Scaler, Standardization};
pub use split::{split, split_with, SplitMode};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::compute_metrics;
use crate::record::{Dataset, Flags};
use crate::turbine::TurbineParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    pub bin_width_ms: f64,
    pub k_sigma: f64,
    pub max_iter: usize,
    pub low_wind_speed_ms: f64,
    pub low_wind_power_w: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            bin_width_ms: 0.5,
            k_sigma: 3.0,
            max_iter: 20,
            low_wind_speed_ms: 3.5,
            low_wind_power_w: 25_000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub total: usize,
    pub retained: usize,
    pub rejected: usize,
    pub retention_ratio: f64,
    pub physical: PhysicalReport,
    pub outliers: OutlierReport,
    pub low_wind: LowWindReport,
    /// Records rejected by each stage that no earlier stage had rejected.
    pub newly_rejected: StageCounts,
    pub curve_iterations: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub non_physical: usize,
    pub outlier: usize,
    pub low_wind: usize,
}

/// Runs the three filters in order: physical screening, outliers against the
/// iterative-median curve of the physically valid records, low-wind cutoff.
pub fn clean(
    dataset: &mut Dataset,
    params: &TurbineParams,
    config: &PreprocessConfig,
) -> Result<(PowerCurveEstimate, PipelineReport)> {
    let before = dataset.rejected_count();
    let physical = filter_physical(dataset, params);
    let after_physical = dataset.rejected_count();

    let curve = estimate_power_curve(dataset, config.bin_width_ms, config.k_sigma, config.max_iter)?;
    let outliers = filter_outliers(dataset, &curve, config.k_sigma);
    let after_outliers = dataset.rejected_count();

    let low_wind = low_wind_cutoff(dataset, config.low_wind_speed_ms, config.low_wind_power_w);
    let after_low = dataset.rejected_count();

    let total = dataset.len();
    let retained = dataset.retained_count();
    Ok((
        curve.clone(),
        PipelineReport {
            total,
            retained,
            rejected: total - retained,
            retention_ratio: if total == 0 { 0.0 } else { retained as f64 / total as f64 },
            physical,
            outliers,
            low_wind,
            newly_rejected: StageCounts {
                non_physical: after_physical - before,
                outlier: after_outliers - after_physical,
                low_wind: after_low - after_outliers,
            },
            curve_iterations: curve.iterations_used,
        },
    ))
}

/// MAPE (percent) between measured power and g·T·ω over the unflagged
/// records, computed in kW so that near-zero powers (< 1 kW) are skipped.
pub fn noise_floor(dataset: &Dataset, params: &TurbineParams) -> Result<f64> {
    let (pred, meas): (Vec<f64>, Vec<f64>) = dataset
        .retained()
        .map(|r| (params.gear_ratio * r.torque_nm * r.rotor_speed_rads / 1e3, r.power_w / 1e3))
        .unzip();
    if meas.is_empty() {
        return Err(Error::Empty("noise floor input"));
    }
    compute_metrics(&pred, &meas, None)?
        .mape
        .ok_or(Error::Empty("no record above the MAPE floor"))
}

/// Records flagged with any of `flags`.
pub fn count_any(dataset: &Dataset, flags: Flags) -> usize {
    dataset.records.iter().filter(|r| r.flags.intersects(flags)).count()
}
