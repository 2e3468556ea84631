//! Zero-mean, unit-variance standardization of network inputs and targets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::Dataset;
use crate::target::TargetKind;
use crate::turbine::TurbineParams;

/// Affine map x ↦ (x − mean)/std for one column, using the population std.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: f64,
    pub std: f64,
}

impl Standardization {
    pub const IDENTITY: Standardization = Standardization { mean: 0.0, std: 1.0 };

    pub fn fit(values: &[f64], name: &str) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::ConstantFeature(name.to_string()));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        if !(std > 0.0 && std.is_finite()) {
            return Err(Error::ConstantFeature(name.to_string()));
        }
        Ok(Standardization { mean, std })
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        (x - self.mean) / self.std
    }

    #[inline]
    pub fn invert(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

/// Standardization for the three inputs (v, β, ω) and the model target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub inputs: [Standardization; 3],
    pub target: Standardization,
}

impl Scaler {
    pub const IDENTITY: Scaler = Scaler {
        inputs: [Standardization::IDENTITY; 3],
        target: Standardization::IDENTITY,
    };

    pub fn apply_inputs(&self, x: [f64; 3]) -> [f64; 3] {
        [self.inputs[0].apply(x[0]), self.inputs[1].apply(x[1]), self.inputs[2].apply(x[2])]
    }

    pub fn invert_inputs(&self, z: [f64; 3]) -> [f64; 3] {
        [self.inputs[0].invert(z[0]), self.inputs[1].invert(z[1]), self.inputs[2].invert(z[2])]
    }
}

/// Fits a scaler on the unflagged records of the training split.
pub fn fit_scaler(train: &Dataset, target_kind: TargetKind, params: &TurbineParams) -> Result<Scaler> {
    let mut cols: [Vec<f64>; 4] = Default::default();
    for r in train.retained() {
        cols[0].push(r.wind_speed_ms);
        cols[1].push(r.pitch_deg);
        cols[2].push(r.rotor_speed_rads);
        cols[3].push(target_kind.data_target(r, params)?);
    }
    if cols[0].is_empty() {
        return Err(Error::Empty("training split"));
    }
    Ok(Scaler {
        inputs: [
            Standardization::fit(&cols[0], "wind_speed_ms")?,
            Standardization::fit(&cols[1], "pitch_deg")?,
            Standardization::fit(&cols[2], "rotor_speed_rads")?,
        ],
        target: Standardization::fit(&cols[3], target_kind.name())?,
    })
}
