//! Trains a plain network and a physics-informed one for each target and
//! compares their held-out power errors against P and against g·T·ω.

use turbine_pinn::prelude::*;

fn main() -> Result<()> {
    let cfg = SyntheticConfig {
        n_records: 20_000,
        ..SyntheticConfig::default()
    };
    let mut data = synthetic::classic_cp_dataset(&cfg);
    clean(&mut data, &cfg.turbine, &PreprocessConfig::default())?;
    let (train, test) = split(&data, 0.8, 42)?;
    println!("noise floor {:.3}%", noise_floor(&test, &cfg.turbine)?);

    println!("{:<10} {:>10} {:>10} {:>10}", "model", "MAE kW", "Data MAPE", "Phys MAPE");
    for kind in [TargetKind::Cp, TargetKind::Torque, TargetKind::Power] {
        for (label, pinn) in [("NN", PinnConfig::plain(kind)), ("PINN", PinnConfig::new(kind))] {
            let trained = train_pinn(&pinn.with_epochs(30), &train, &test, &cfg.turbine)?;
            let e = evaluate(&trained.model, &test, &cfg.turbine)?;
            println!(
                "{:<10} {:>10.2} {:>9.3}% {:>9.3}%",
                format!("{label}_{kind}"),
                e.data.mae,
                e.data.mape.unwrap_or(f64::NAN),
                e.phys.mape.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}
