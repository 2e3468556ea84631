//! Turbine constants and the two state equations linking power to
//! torque/rotor speed and to the power coefficient.
//!
//! All quantities are SI: m/s, rad/s, N·m, W. Pitch is kept in degrees.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest rotor speed (rad/s) accepted as a divisor.
pub const OMEGA_MIN: f64 = 1e-3;
/// Smallest wind speed (m/s) accepted as a divisor.
pub const V_MIN: f64 = 0.1;
/// Theoretical maximum power coefficient.
pub const BETZ_LIMIT: f64 = 0.5926;

/// Fixed physical constants of one turbine model.
///
/// `swept_area_m2` is stored as given and is not derived from
/// `rotor_radius_m`; the MM82 data sheet lists 5281 m², which is close to
/// but not exactly π·41².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurbineParams {
    pub rotor_radius_m: f64,
    pub swept_area_m2: f64,
    pub gear_ratio: f64,
    pub air_density_kgm3: f64,
    pub betz_limit: f64,
}

impl TurbineParams {
    /// Senvion MM82 (R = 41 m, A = 5281 m², g = 106, ρ = 1.225 kg/m³).
    pub const MM82: TurbineParams = TurbineParams {
        rotor_radius_m: 41.0,
        swept_area_m2: 5281.0,
        gear_ratio: 106.0,
        air_density_kgm3: 1.225,
        betz_limit: BETZ_LIMIT,
    };

    pub fn new(
        rotor_radius_m: f64,
        swept_area_m2: f64,
        gear_ratio: f64,
        air_density_kgm3: f64,
        betz_limit: f64,
    ) -> Result<Self> {
        let params = TurbineParams {
            rotor_radius_m,
            swept_area_m2,
            gear_ratio,
            air_density_kgm3,
            betz_limit,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("rotor_radius_m", self.rotor_radius_m),
            ("swept_area_m2", self.swept_area_m2),
            ("gear_ratio", self.gear_ratio),
            ("air_density_kgm3", self.air_density_kgm3),
            ("betz_limit", self.betz_limit),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and positive, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// ½·ρ·A, the factor in front of Cp·v³.
    #[inline]
    pub fn half_rho_area(&self) -> f64 {
        0.5 * self.air_density_kgm3 * self.swept_area_m2
    }

    /// Kinetic power of the wind crossing the rotor disc, ½ρAv³.
    #[inline]
    pub fn wind_power(&self, wind_speed_ms: f64) -> f64 {
        self.half_rho_area() * wind_speed_ms.powi(3)
    }
}

impl Default for TurbineParams {
    fn default() -> Self {
        Self::MM82
    }
}

fn finite(name: &'static str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite(name))
    }
}

/// P = g·T·ω.
pub fn power_from_torque(torque_nm: f64, rotor_speed_rads: f64, params: &TurbineParams) -> Result<f64> {
    finite("torque", torque_nm)?;
    finite("rotor speed", rotor_speed_rads)?;
    Ok(params.gear_ratio * torque_nm * rotor_speed_rads)
}

/// T = P / (g·ω); refuses stalled rotors.
pub fn torque_from_power(power_w: f64, rotor_speed_rads: f64, params: &TurbineParams) -> Result<f64> {
    finite("power", power_w)?;
    finite("rotor speed", rotor_speed_rads)?;
    if rotor_speed_rads <= OMEGA_MIN {
        return Err(Error::DivisionGuard {
            quantity: "rotor speed",
            value: rotor_speed_rads,
            guard: OMEGA_MIN,
        });
    }
    Ok(power_w / (params.gear_ratio * rotor_speed_rads))
}

/// P = ½·Cp·ρ·A·v³.
pub fn power_from_cp(cp: f64, wind_speed_ms: f64, params: &TurbineParams) -> Result<f64> {
    finite("power coefficient", cp)?;
    finite("wind speed", wind_speed_ms)?;
    if wind_speed_ms < 0.0 {
        return Err(Error::Domain(format!("negative wind speed {wind_speed_ms}")));
    }
    Ok(cp * params.wind_power(wind_speed_ms))
}

/// Cp = 2P / (ρ·A·v³). The caller decides what to do with values above
/// the Betz limit.
pub fn cp_from_power(power_w: f64, wind_speed_ms: f64, params: &TurbineParams) -> Result<f64> {
    finite("power", power_w)?;
    let v = wind_guard(wind_speed_ms)?;
    Ok(power_w / params.wind_power(v))
}

/// λ = ω·R / v.
pub fn tip_speed_ratio(rotor_speed_rads: f64, wind_speed_ms: f64, params: &TurbineParams) -> Result<f64> {
    finite("rotor speed", rotor_speed_rads)?;
    let v = wind_guard(wind_speed_ms)?;
    Ok(rotor_speed_rads * params.rotor_radius_m / v)
}

/// Cp implied by measured torque and rotor speed, 2gTω / (ρAv³).
pub fn cp_from_torque(
    torque_nm: f64,
    rotor_speed_rads: f64,
    wind_speed_ms: f64,
    params: &TurbineParams,
) -> Result<f64> {
    let p = power_from_torque(torque_nm, rotor_speed_rads, params)?;
    cp_from_power(p, wind_speed_ms, params)
}

fn wind_guard(wind_speed_ms: f64) -> Result<f64> {
    finite("wind speed", wind_speed_ms)?;
    if wind_speed_ms <= V_MIN {
        return Err(Error::DivisionGuard {
            quantity: "wind speed",
            value: wind_speed_ms,
            guard: V_MIN,
        });
    }
    Ok(wind_speed_ms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const P: TurbineParams = TurbineParams::MM82;

    #[test]
    fn power_torque_examples() {
        assert_eq!(power_from_torque(0.0, 1.5, &P).unwrap(), 0.0);
        assert_relative_eq!(power_from_torque(1000.0, 1.5, &P).unwrap(), 159_000.0, max_relative = 1e-15);
        assert_relative_eq!(torque_from_power(159_000.0, 1.5, &P).unwrap(), 1000.0, max_relative = 1e-15);
        assert_eq!(torque_from_power(0.0, 1.5, &P).unwrap(), 0.0);
        assert!(matches!(torque_from_power(1.0, 0.0, &P), Err(Error::DivisionGuard { .. })));
        assert!(power_from_torque(f64::NAN, 1.0, &P).is_err());
    }

    #[test]
    fn power_cp_examples() {
        assert_eq!(power_from_cp(0.0, 8.0, &P).unwrap(), 0.0);
        assert_eq!(power_from_cp(0.45, 0.0, &P).unwrap(), 0.0);
        // 0.5 * 0.45 * 1.225 * 5281 * 512
        assert_relative_eq!(power_from_cp(0.45, 8.0, &P).unwrap(), 745_254.72, max_relative = 1e-6);
        assert_relative_eq!(cp_from_power(745_254.72, 8.0, &P).unwrap(), 0.45, max_relative = 1e-6);
        let over = cp_from_power(1.0e6, 8.0, &P).unwrap();
        assert_relative_eq!(over, 0.603_820_4, max_relative = 1e-6);
        assert!(over > P.betz_limit);
        assert_eq!(cp_from_power(0.0, 8.0, &P).unwrap(), 0.0);
        assert!(matches!(cp_from_power(1.0, 0.05, &P), Err(Error::DivisionGuard { .. })));
    }

    #[test]
    fn tip_speed_ratio_examples() {
        assert_relative_eq!(tip_speed_ratio(1.6, 8.0, &P).unwrap(), 8.2, max_relative = 1e-15);
        assert_eq!(tip_speed_ratio(0.0, 8.0, &P).unwrap(), 0.0);
        assert!(matches!(tip_speed_ratio(1.0, 0.0, &P), Err(Error::DivisionGuard { .. })));
    }

    #[test]
    fn params_validation() {
        assert!(TurbineParams::new(41.0, 5281.0, 106.0, 1.225, 0.5926).is_ok());
        assert!(TurbineParams::new(41.0, -1.0, 106.0, 1.225, 0.5926).is_err());
        assert!(TurbineParams::new(41.0, 5281.0, f64::NAN, 1.225, 0.5926).is_err());
    }

    proptest! {
        #[test]
        fn cp_round_trip(c in -1.0f64..1.0, v in 1.0f64..30.0) {
            let p = power_from_cp(c, v, &P).unwrap();
            let back = cp_from_power(p, v, &P).unwrap();
            prop_assert!((back - c).abs() <= 1e-9 * c.abs().max(f64::MIN_POSITIVE));
        }

        #[test]
        fn torque_round_trip(t in -1e6f64..1e6, w in 0.1f64..5.0) {
            let p = power_from_torque(t, w, &P).unwrap();
            let back = torque_from_power(p, w, &P).unwrap();
            prop_assert!((back - t).abs() <= 1e-12 * t.abs().max(f64::MIN_POSITIVE));
        }
    }
}
