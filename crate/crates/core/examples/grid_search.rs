//! Ranks a reduced hyperparameter grid for the power target.

use turbine_pinn::nn::{grid_search, GridBudget, GridSpace};
use turbine_pinn::pinn::prepare_samples;
use turbine_pinn::preprocess::fit_scaler;
use turbine_pinn::prelude::*;

fn main() -> Result<()> {
    let cfg = SyntheticConfig {
        n_records: 10_000,
        ..SyntheticConfig::default()
    };
    let data = synthetic::classic_cp_dataset(&cfg);
    let (train, val) = split(&data, 0.8, 42)?;
    let scaler = fit_scaler(&train, TargetKind::Power, &cfg.turbine)?;
    let train = prepare_samples(&train, &scaler, TargetKind::Power, &cfg.turbine, false)?;
    let val = prepare_samples(&val, &scaler, TargetKind::Power, &cfg.turbine, false)?;

    let space = GridSpace {
        n_layers: vec![1, 2],
        n_neurons: vec![16, 64],
        learning_rates: vec![1e-2, 1e-3],
        ..GridSpace::full()
    };
    let ranked = grid_search(&space, &train, &val, &GridBudget::default())?;
    for r in ranked.iter().take(5) {
        let c = r.candidate;
        println!(
            "{} × {:<3} {:?} lr {:<6} val MAE {:.4} ({} parameters)",
            c.n_layers, c.n_neurons, c.activation, c.learning_rate, r.val_mae, r.parameter_count
        );
    }
    Ok(())
}
