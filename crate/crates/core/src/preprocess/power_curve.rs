//! Binned power-curve estimate by iterative median rejection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::Dataset;

/// Scale factor turning a median absolute deviation into a Gaussian-consistent sigma.
pub const MAD_TO_SIGMA: f64 = 1.4826;

/// In a bin with zero spread, points within this distance of the median
/// (watts) are not outliers.
pub const DEGENERATE_TOLERANCE_W: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurveEstimate {
    /// `n_bins + 1` ascending edges in m/s.
    pub bin_edges: Vec<f64>,
    /// Median power per bin; `None` for bins without data.
    pub bin_median_power_w: Vec<Option<f64>>,
    /// Robust spread (1.4826·MAD) per bin.
    pub bin_sigma_w: Vec<Option<f64>>,
    /// Points contributing to the final estimate of each bin.
    pub bin_counts: Vec<usize>,
    /// Number of passes that excluded at least one point.
    pub iterations_used: usize,
}

impl PowerCurveEstimate {
    pub fn n_bins(&self) -> usize {
        self.bin_median_power_w.len()
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_edges[1] - self.bin_edges[0]
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        0.5 * (self.bin_edges[i] + self.bin_edges[i + 1])
    }

    /// Bin holding `wind_speed_ms`, or `None` outside the covered range.
    pub fn bin_index(&self, wind_speed_ms: f64) -> Option<usize> {
        bin_index(self.bin_edges[0], self.bin_width(), self.n_bins(), wind_speed_ms)
    }

    /// Bin statistics at `wind_speed_ms` if that bin has data.
    pub fn lookup(&self, wind_speed_ms: f64) -> Option<(f64, f64)> {
        let i = self.bin_index(wind_speed_ms)?;
        Some((self.bin_median_power_w[i]?, self.bin_sigma_w[i]?))
    }
}

fn bin_index(start: f64, width: f64, n_bins: usize, v: f64) -> Option<usize> {
    if !v.is_finite() || v < start {
        return None;
    }
    let i = ((v - start) / width).floor() as usize;
    (i < n_bins).then_some(i)
}

/// Whether `power_w` lies further than `k_sigma`·σ from `median`.
pub(crate) fn deviates(power_w: f64, median: f64, sigma: f64, k_sigma: f64) -> bool {
    let dev = (power_w - median).abs();
    if sigma > 0.0 {
        dev > k_sigma * sigma
    } else {
        dev > DEGENERATE_TOLERANCE_W
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    debug_assert!(!values.is_empty());
    values.sort_unstable_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Median and 1.4826·MAD of `values`.
pub fn median_and_sigma(values: &[f64]) -> (f64, f64) {
    let mut buf = values.to_vec();
    let med = median(&mut buf);
    for x in buf.iter_mut() {
        *x = (*x - med).abs();
    }
    (med, MAD_TO_SIGMA * median(&mut buf))
}

/// Estimates the power curve of the unflagged records in `dataset`.
///
/// Each pass computes per-bin median and robust sigma from the points still
/// included, then drops the points further than `k_sigma`·σ from their bin
/// median. Passes repeat until nothing new is dropped or `max_iter` passes
/// have excluded points.
pub fn estimate_power_curve(
    dataset: &Dataset,
    bin_width_ms: f64,
    k_sigma: f64,
    max_iter: usize,
) -> Result<PowerCurveEstimate> {
    if !(bin_width_ms > 0.0 && bin_width_ms.is_finite()) {
        return Err(Error::Config(format!("bin width must be positive, got {bin_width_ms}")));
    }
    let points: Vec<(f64, f64)> = dataset
        .retained()
        .filter(|r| r.wind_speed_ms.is_finite() && r.power_w.is_finite())
        .map(|r| (r.wind_speed_ms, r.power_w))
        .collect();
    if points.is_empty() {
        return Err(Error::Empty("power curve input"));
    }

    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(v, _)| (lo.min(v), hi.max(v)));
    let start = (lo / bin_width_ms).floor() * bin_width_ms;
    let n_bins = ((hi - start) / bin_width_ms).floor() as usize + 1;
    let bin_edges: Vec<f64> = (0..=n_bins).map(|i| start + i as f64 * bin_width_ms).collect();

    let bins: Vec<usize> = points
        .iter()
        .map(|&(v, _)| bin_index(start, bin_width_ms, n_bins, v).unwrap_or(n_bins - 1))
        .collect();
    let mut included = vec![true; points.len()];

    let stats = |included: &[bool]| -> Vec<Option<(f64, f64, usize)>> {
        let mut per_bin: Vec<Vec<f64>> = vec![Vec::new(); n_bins];
        for ((&(_, p), &b), &inc) in points.iter().zip(&bins).zip(included) {
            if inc {
                per_bin[b].push(p);
            }
        }
        per_bin
            .iter()
            .map(|vals| {
                (!vals.is_empty()).then(|| {
                    let (m, s) = median_and_sigma(vals);
                    (m, s, vals.len())
                })
            })
            .collect()
    };

    let mut current = stats(&included);
    let mut iterations_used = 0;
    while iterations_used < max_iter {
        let mut excluded_any = false;
        for (i, &(_, p)) in points.iter().enumerate() {
            if !included[i] {
                continue;
            }
            if let Some((m, s, _)) = current[bins[i]] {
                if deviates(p, m, s, k_sigma) {
                    included[i] = false;
                    excluded_any = true;
                }
            }
        }
        if !excluded_any {
            break;
        }
        iterations_used += 1;
        current = stats(&included);
    }

    Ok(PowerCurveEstimate {
        bin_edges,
        bin_median_power_w: current.iter().map(|s| s.map(|(m, _, _)| m)).collect(),
        bin_sigma_w: current.iter().map(|s| s.map(|(_, s, _)| s)).collect(),
        bin_counts: current.iter().map(|s| s.map_or(0, |(_, _, n)| n)).collect(),
        iterations_used,
    })
}
