//! Converts one operating point between power, torque and Cp.

use turbine_pinn::prelude::*;
use turbine_pinn::turbine::{cp_from_power, power_from_cp, power_from_torque, tip_speed_ratio, torque_from_power};

fn main() -> Result<()> {
    let mm82 = TurbineParams::MM82;
    let (v, omega, torque) = (8.0, 1.5, 4_000.0);

    let power = power_from_torque(torque, omega, &mm82)?;
    let cp = cp_from_power(power, v, &mm82)?;
    println!("v = {v} m/s, ω = {omega} rad/s, T = {torque} N·m");
    println!("P  = {:.1} kW", power / 1e3);
    println!("Cp = {cp:.4} (Betz {:.4})", mm82.betz_limit);
    println!("λ  = {:.3}", tip_speed_ratio(omega, v, &mm82)?);
    println!("T back from P  = {:.6} N·m", torque_from_power(power, omega, &mm82)?);
    println!("P back from Cp = {:.6} kW", power_from_cp(cp, v, &mm82)? / 1e3);

    for kind in [TargetKind::Power, TargetKind::Cp, TargetKind::Torque] {
        let r = ScadaRecord::new(v, 0.0, omega, torque, power);
        println!("{:>6} physics target: {:.6}", kind.to_string(), kind.physics_target(&r, &mm82)?);
    }
    Ok(())
}
