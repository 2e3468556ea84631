//! Least-squares fit of the empirical Cp surface from a perturbed start.

use turbine_pinn::empirical::power_metrics;
use turbine_pinn::prelude::*;

fn main() -> Result<()> {
    let cfg = SyntheticConfig {
        n_records: 20_000,
        ..SyntheticConfig::default()
    };
    let data = synthetic::classic_cp_dataset(&cfg);
    let (train, test) = split(&data, 0.8, 42)?;

    let init = CpParams::from_array(CpParams::CLASSIC.to_array().map(|c| 1.08 * c));
    let fit = fit_least_squares(&train, &cfg.turbine, &init, &FitConfig::default())?;
    let d = &fit.diagnostics;
    println!("{:?} after {} iterations, Cp RMSE {:.2e}", d.stop_reason, d.iterations, d.cp_rmse);
    for (name, (got, want)) in turbine_pinn::empirical::PARAM_NAMES
        .iter()
        .zip(fit.params.to_array().iter().zip(CpParams::CLASSIC.to_array()))
    {
        println!("  {name:>2} = {got:>12.6}  (generating {want})");
    }
    let m = power_metrics(&test, &cfg.turbine, &fit.params)?;
    println!("held-out power: MAE {:.2} kW, MAPE {:.3}%", m.mae, m.mape.unwrap_or(f64::NAN));
    Ok(())
}
