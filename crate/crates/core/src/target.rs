//! Regression target choices and the conversions between them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::ScadaRecord;
use crate::turbine::{self, TurbineParams};

/// Quantity a network regresses. Power is always recovered from it through
/// the state equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    Cp,
    Torque,
    Power,
}

impl TargetKind {
    pub const ALL: [TargetKind; 3] = [TargetKind::Cp, TargetKind::Torque, TargetKind::Power];

    /// Measured value of this target for a record.
    pub fn data_target(self, r: &ScadaRecord, params: &TurbineParams) -> Result<f64> {
        match self {
            TargetKind::Cp => turbine::cp_from_power(r.power_w, r.wind_speed_ms, params),
            TargetKind::Torque => Ok(r.torque_nm),
            TargetKind::Power => Ok(r.power_w),
        }
    }

    /// Value of this target implied by the other measured channels:
    /// gTω for power, 2gTω/(ρAv³) for Cp, P/(gω) for torque.
    pub fn physics_target(self, r: &ScadaRecord, params: &TurbineParams) -> Result<f64> {
        match self {
            TargetKind::Cp => turbine::cp_from_torque(r.torque_nm, r.rotor_speed_rads, r.wind_speed_ms, params),
            TargetKind::Torque => turbine::torque_from_power(r.power_w, r.rotor_speed_rads, params),
            TargetKind::Power => turbine::power_from_torque(r.torque_nm, r.rotor_speed_rads, params),
        }
    }

    /// dP/d(target) at a fixed operating point. Every conversion to power is
    /// linear in the target, so this is also the exact propagation factor
    /// for uncertainties.
    pub fn power_factor(self, wind_speed_ms: f64, rotor_speed_rads: f64, params: &TurbineParams) -> f64 {
        match self {
            TargetKind::Cp => params.wind_power(wind_speed_ms),
            TargetKind::Torque => params.gear_ratio * rotor_speed_rads,
            TargetKind::Power => 1.0,
        }
    }

    /// Converts a target value (physical units) to power in watts.
    pub fn to_power(self, value: f64, wind_speed_ms: f64, rotor_speed_rads: f64, params: &TurbineParams) -> f64 {
        value * self.power_factor(wind_speed_ms, rotor_speed_rads, params)
    }

    pub fn name(self) -> &'static str {
        match self {
            TargetKind::Cp => "cp",
            TargetKind::Torque => "torque",
            TargetKind::Power => "power",
        }
    }
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TargetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cp" => Ok(TargetKind::Cp),
            "torque" | "t" => Ok(TargetKind::Torque),
            "power" | "p" => Ok(TargetKind::Power),
            other => Err(Error::Config(format!("unknown target kind `{other}`"))),
        }
    }
}
