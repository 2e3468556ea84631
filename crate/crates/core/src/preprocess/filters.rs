//! Record filters. Filters only set flags; channel values are never touched,
//! and applying a filter twice is the same as applying it once.

use serde::{Deserialize, Serialize};

use super::power_curve::{deviates, PowerCurveEstimate};
use crate::record::{Dataset, Flags};
use crate::turbine::{self, TurbineParams};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhysicalReport {
    pub betz_exceeded: usize,
    pub negative_power: usize,
    pub nonpositive_wind: usize,
    pub negative_rotor_speed: usize,
    /// Wind speed positive but too small to form a power coefficient.
    pub cp_undefined: usize,
    /// Records carrying NON_PHYSICAL after the filter.
    pub flagged: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutlierReport {
    pub flagged: usize,
    /// Records whose wind speed falls outside the curve or in an empty bin.
    pub out_of_range: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowWindReport {
    pub flagged: usize,
}

/// Flags NON_PHYSICAL: Cp above the Betz limit, negative power, non-positive
/// wind speed or negative rotor speed. A Cp exactly at the limit is kept.
pub fn filter_physical(dataset: &mut Dataset, params: &TurbineParams) -> PhysicalReport {
    let mut report = PhysicalReport::default();
    for r in &mut dataset.records {
        let mut bad = false;
        if r.power_w < 0.0 {
            report.negative_power += 1;
            bad = true;
        }
        if r.rotor_speed_rads < 0.0 {
            report.negative_rotor_speed += 1;
            bad = true;
        }
        if r.wind_speed_ms <= 0.0 {
            report.nonpositive_wind += 1;
            bad = true;
        } else {
            match turbine::cp_from_power(r.power_w, r.wind_speed_ms, params) {
                Ok(cp) if cp > params.betz_limit => {
                    report.betz_exceeded += 1;
                    bad = true;
                }
                Ok(_) => {}
                Err(_) => {
                    report.cp_undefined += 1;
                    bad = true;
                }
            }
        }
        if bad {
            r.flags |= Flags::NON_PHYSICAL;
        }
    }
    report.flagged = dataset.count_flag(Flags::NON_PHYSICAL);
    report
}

/// Flags OUTLIER on records further than `k_sigma`·σ from their bin median.
/// Records outside the curve's range (or in empty bins) pass through.
pub fn filter_outliers(dataset: &mut Dataset, curve: &PowerCurveEstimate, k_sigma: f64) -> OutlierReport {
    let mut report = OutlierReport::default();
    for r in &mut dataset.records {
        match curve.lookup(r.wind_speed_ms) {
            Some((median, sigma)) => {
                if deviates(r.power_w, median, sigma, k_sigma) {
                    r.flags |= Flags::OUTLIER;
                }
            }
            None => report.out_of_range += 1,
        }
    }
    report.flagged = dataset.count_flag(Flags::OUTLIER);
    report
}

/// Flags LOW_WIND_REJECT on records with v < `v_thresh_ms` and P > `p_cut_w`.
pub fn low_wind_cutoff(dataset: &mut Dataset, v_thresh_ms: f64, p_cut_w: f64) -> LowWindReport {
    for r in &mut dataset.records {
        if r.wind_speed_ms < v_thresh_ms && r.power_w > p_cut_w {
            r.flags |= Flags::LOW_WIND_REJECT;
        }
    }
    LowWindReport {
        flagged: dataset.count_flag(Flags::LOW_WIND_REJECT),
    }
}
