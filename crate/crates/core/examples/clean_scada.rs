//! Cleans a synthetic power curve with implanted gross errors and scores the
//! filters against the known labels.

use turbine_pinn::prelude::*;
use turbine_pinn::synthetic::{anomaly_dataset, AnomalyConfig};

fn main() -> Result<()> {
    let cfg = AnomalyConfig {
        n_records: 20_000,
        ..AnomalyConfig::default()
    };
    let labeled = anomaly_dataset(&cfg);
    let mut data = labeled.dataset;
    let (curve, report) = clean(&mut data, &cfg.turbine, &PreprocessConfig::default())?;

    println!("{}", serde_json::to_string_pretty(&report.newly_rejected).unwrap());
    println!("retained {} of {} ({:.1}%)", report.retained, report.total, 100.0 * report.retention_ratio);
    println!("curve settled after {} iterations", report.curve_iterations);

    let (mut hit, mut n_anomalous) = (0, 0);
    for (r, &bad) in data.records.iter().zip(&labeled.is_anomaly) {
        if bad {
            n_anomalous += 1;
            hit += !r.flags.is_empty() as usize;
        }
    }
    println!("recall on implanted errors: {:.3}", hit as f64 / n_anomalous as f64);

    for v in [4.0, 8.0, 12.0, 16.0] {
        if let Some((median, sigma)) = curve.lookup(v) {
            println!("  v = {v:>4} m/s: median {:>7.1} kW, σ {:>5.1} kW", median / 1e3, sigma / 1e3);
        }
    }
    Ok(())
}
