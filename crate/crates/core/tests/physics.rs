mod common;

use proptest::prelude::*;

use common::physics_identity_worst;
use turbine_pinn::preprocess::{clean, PreprocessConfig};
use turbine_pinn::record::ScadaRecord;
use turbine_pinn::synthetic::{classic_cp_dataset, SyntheticConfig};
use turbine_pinn::target::TargetKind;
use turbine_pinn::turbine::{
    cp_from_power, power_from_cp, power_from_torque, tip_speed_ratio, torque_from_power, TurbineParams, BETZ_LIMIT,
};

const MM82: TurbineParams = TurbineParams::MM82;

#[test]
fn identities_on_random_records() {
    let worst = physics_identity_worst(100_000, 3);
    assert!(worst < 1e-9, "{worst}");
}

#[test]
fn reference_values() {
    assert_eq!(power_from_torque(1000.0, 1.5, &MM82).unwrap(), 159_000.0);
    assert_eq!(torque_from_power(159_000.0, 1.5, &MM82).unwrap(), 1000.0);
    let p = power_from_cp(0.45, 8.0, &MM82).unwrap();
    assert!((p / 745_254.72 - 1.0).abs() < 1e-6, "{p}");
    assert!((cp_from_power(1e6, 8.0, &MM82).unwrap() - 0.6038).abs() < 1e-4);
    assert!((tip_speed_ratio(1.6, 8.0, &MM82).unwrap() - 8.2).abs() < 1e-12);
}

#[test]
fn consistent_records_give_coinciding_targets() {
    let data = classic_cp_dataset(&SyntheticConfig {
        n_records: 2000,
        power_noise: 0.0,
        ..SyntheticConfig::default()
    });
    for r in &data.records {
        for kind in TargetKind::ALL {
            let d = kind.data_target(r, &MM82).unwrap();
            let p = kind.physics_target(r, &MM82).unwrap();
            assert!((d - p).abs() <= 1e-9 * d.abs().max(1e-12), "{kind}: {d} vs {p}");
        }
    }
}

#[test]
fn retained_cp_physics_targets_respect_betz() {
    let mut data = classic_cp_dataset(&SyntheticConfig {
        n_records: 5000,
        power_noise: 0.05,
        ..SyntheticConfig::default()
    });
    // a handful of impossible records
    for r in data.records.iter_mut().step_by(97) {
        r.torque_nm *= 2.5;
        r.power_w *= 2.5;
    }
    clean(&mut data, &MM82, &PreprocessConfig::default()).unwrap();
    for r in data.retained() {
        let cp = TargetKind::Cp.physics_target(r, &MM82).unwrap();
        assert!(cp <= BETZ_LIMIT + 1e-12, "{r:?} -> {cp}");
    }
}

#[test]
fn guards() {
    assert!(torque_from_power(1.0, 1e-3, &MM82).is_err());
    assert!(cp_from_power(1.0, 0.1, &MM82).is_err());
    assert!(tip_speed_ratio(1.0, 0.05, &MM82).is_err());
    assert!(power_from_torque(f64::NAN, 1.0, &MM82).is_err());
    let stalled = ScadaRecord::new(8.0, 0.0, 0.0, 100.0, 1e5);
    assert!(TargetKind::Torque.physics_target(&stalled, &MM82).is_err());
}

proptest! {
    #[test]
    fn power_scales_with_cube_of_wind(cp in 0.0f64..0.59, v in 0.2f64..25.0) {
        let p1 = power_from_cp(cp, v, &MM82).unwrap();
        let p2 = power_from_cp(cp, 2.0 * v, &MM82).unwrap();
        prop_assert!((p2 - 8.0 * p1).abs() <= 1e-9 * p2.abs().max(1e-9));
    }

    #[test]
    fn tip_speed_ratio_linear_in_rotor_speed(omega in 0.0f64..3.0, v in 0.2f64..25.0, k in 0.1f64..5.0) {
        let a = tip_speed_ratio(omega, v, &MM82).unwrap();
        let b = tip_speed_ratio(k * omega, v, &MM82).unwrap();
        prop_assert!((b - k * a).abs() <= 1e-12 * b.abs().max(1.0));
    }
}
