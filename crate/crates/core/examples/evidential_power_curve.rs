//! Evidential power model with a ±3σ epistemic band per wind-speed bin.

use turbine_pinn::pinn::predict_power_with_uncertainty;
use turbine_pinn::prelude::*;

fn main() -> Result<()> {
    let cfg = SyntheticConfig {
        n_records: 20_000,
        ..SyntheticConfig::default()
    };
    let mut data = synthetic::classic_cp_dataset(&cfg);
    clean(&mut data, &cfg.turbine, &PreprocessConfig::default())?;
    let (train, test) = split(&data, 0.8, 42)?;

    let config = PinnConfig::evidential(TargetKind::Power).with_epochs(40);
    let trained = train_pinn(&config, &train, &test, &cfg.turbine)?;

    let e = evaluate(&trained.model, &test, &cfg.turbine)?;
    let measured: Vec<f64> = test.retained().map(|r| r.power_w).collect();
    let report = calibration_report(&e.predicted_power_w, e.sigma_power_w.as_deref().unwrap(), &measured)?;
    println!(
        "MAE {:.2} kW, MAU {:.2} kW, 3σ coverage {:.3}",
        report.mae / 1e3,
        report.mau / 1e3,
        report.coverage[2]
    );

    // the record with the median rotor speed stands in for each bin
    println!("{:>6} {:>10} {:>10} {:>10}", "v m/s", "lower kW", "mean kW", "upper kW");
    for i in 0..21 {
        let v = 4.0 + 0.5 * i as f64;
        let mut bin: Vec<[f64; 3]> = test
            .retained()
            .filter(|r| (r.wind_speed_ms - v).abs() < 0.25)
            .map(|r| r.inputs())
            .collect();
        if bin.is_empty() {
            continue;
        }
        bin.sort_by(|a, b| a[2].total_cmp(&b[2]));
        let point = bin[bin.len() / 2];
        let p = predict_power_with_uncertainty(&trained.model, &[point], &cfg.turbine)?[0];
        let s = 3.0 * p.sigma_w.unwrap_or(0.0);
        println!(
            "{v:>6.1} {:>10.1} {:>10.1} {:>10.1}",
            (p.power_w - s) / 1e3,
            p.power_w / 1e3,
            (p.power_w + s) / 1e3
        );
    }
    Ok(())
}
