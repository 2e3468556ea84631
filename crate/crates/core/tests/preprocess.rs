mod common;

use common::{anomaly_scores, clean_permuted, clean_twice};
use turbine_pinn::preprocess::{
    clean, estimate_power_curve, fit_scaler, noise_floor, split, PreprocessConfig,
};
use turbine_pinn::record::{Dataset, Flags, ScadaRecord};
use turbine_pinn::synthetic::{anomaly_dataset, classic_cp_dataset, AnomalyConfig, SyntheticConfig};
use turbine_pinn::target::TargetKind;
use turbine_pinn::turbine::TurbineParams;

const MM82: TurbineParams = TurbineParams::MM82;

fn small_anomalies() -> AnomalyConfig {
    AnomalyConfig {
        n_records: 20_000,
        ..AnomalyConfig::default()
    }
}

#[test]
fn implanted_anomalies_are_found() {
    let (recall, false_rate) = anomaly_scores(&small_anomalies());
    assert!(recall >= 0.95, "recall {recall}");
    assert!(false_rate <= 0.02, "false flags {false_rate}");
}

#[test]
fn cleaning_is_idempotent() {
    let (first, second) = clean_twice(anomaly_dataset(&small_anomalies()).dataset);
    assert_eq!(first, second);
    let (first, second) = clean_twice(classic_cp_dataset(&SyntheticConfig {
        n_records: 20_000,
        ..SyntheticConfig::default()
    }));
    assert_eq!(first, second);
}

#[test]
fn cleaning_ignores_record_order() {
    let data = anomaly_dataset(&small_anomalies()).dataset;
    let (a, b) = clean_permuted(&data, 8);
    assert_eq!(a, b);
}

#[test]
fn noise_free_curve_is_fully_retained() {
    let mut data = anomaly_dataset(&AnomalyConfig {
        n_records: 10_000,
        power_noise: 0.0,
        anomaly_rate: 0.0,
        ..AnomalyConfig::default()
    })
    .dataset;
    let (_, report) = clean(&mut data, &MM82, &PreprocessConfig::default()).unwrap();
    assert_eq!(report.retained, 10_000);
    assert_eq!(report.retention_ratio, 1.0);
}

#[test]
fn stages_count_new_rejections_once() {
    let mut records = anomaly_dataset(&small_anomalies()).dataset.records;
    records.push(ScadaRecord::new(8.0, 0.0, 1.5, 1.0, 1.0e6));
    records.push(ScadaRecord::new(8.0, 0.0, 1.5, 1.0, -5e3));
    records.push(ScadaRecord::new(3.0, 0.0, 0.5, 1.0, 40e3));
    let mut data = Dataset::new(records, "mixed");
    let (curve, report) = clean(&mut data, &MM82, &PreprocessConfig::default()).unwrap();
    let n = &report.newly_rejected;
    assert_eq!(n.non_physical + n.outlier + n.low_wind, report.rejected);
    assert!(report.physical.betz_exceeded >= 1 && report.physical.negative_power >= 1);
    assert!(data.records[data.len() - 1].flags.contains(Flags::LOW_WIND_REJECT));
    assert!(curve.iterations_used <= 20);
}

#[test]
fn curve_covers_observed_range() {
    let data = anomaly_dataset(&small_anomalies()).dataset;
    let curve = estimate_power_curve(&data, 0.5, 3.0, 20).unwrap();
    let lo = data.records.iter().map(|r| r.wind_speed_ms).fold(f64::INFINITY, f64::min);
    let hi = data.records.iter().map(|r| r.wind_speed_ms).fold(f64::NEG_INFINITY, f64::max);
    assert!(curve.bin_edges[0] <= lo && *curve.bin_edges.last().unwrap() >= hi);
    assert!(curve.bin_index(lo).is_some() && curve.bin_index(hi).is_some());
}

#[test]
fn noise_floor_tracks_injected_noise() {
    let data = classic_cp_dataset(&SyntheticConfig {
        n_records: 100_000,
        ..SyntheticConfig::default()
    });
    let floor = noise_floor(&data, &MM82).unwrap();
    let expected = 2.0 * (2.0 / std::f64::consts::PI).sqrt();
    assert!((floor - expected).abs() < 0.2, "{floor} vs {expected}");
}

#[test]
fn scaler_fitted_on_training_split_only() {
    let data = classic_cp_dataset(&SyntheticConfig {
        n_records: 1000,
        ..SyntheticConfig::default()
    });
    let (train, test) = split(&data, 0.8, 1).unwrap();
    assert_eq!(train.len() + test.len(), 1000);
    let scaler = fit_scaler(&train, TargetKind::Power, &MM82).unwrap();
    let z: Vec<f64> = train.retained().map(|r| scaler.target.apply(r.power_w)).collect();
    let mean = z.iter().sum::<f64>() / z.len() as f64;
    let var = z.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / z.len() as f64;
    assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-12);
    let (other, _) = split(&data, 0.8, 2).unwrap();
    assert_ne!(train.records, other.records);
}
