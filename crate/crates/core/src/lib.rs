//! Wind-turbine power modelling from SCADA records.
//!
//! The crate cleans turbine telemetry, fits the classic empirical power
//! coefficient surface, and trains small neural regressors for the power
//! coefficient, rotor torque or electrical power. Networks can add a physics
//! residual to the loss (the state equations P = g·T·ω and
//! P = ½·Cp·ρ·A·v³) or emit Normal-Inverse-Gamma evidence for an uncertainty
//! estimate.
//!
//! ```no_run
//! use turbine_pinn::prelude::*;
//!
//! let params = TurbineParams::MM82;
//! let mut data = synthetic::classic_cp_dataset(&SyntheticConfig::default());
//! clean(&mut data, &params, &PreprocessConfig::default()).unwrap();
//! let (train, test) = split(&data, 0.8, 42).unwrap();
//! let cfg = PinnConfig::new(TargetKind::Power);
//! let trained = train_pinn(&cfg, &train, &test, &params).unwrap();
//! let eval = evaluate(&trained.model, &test, &params).unwrap();
//! println!("MAPE {:.2}%", eval.data.mape.unwrap());
//! ```

pub mod cli;
pub mod empirical;
pub mod error;
pub mod evidential;
pub mod ingest;
pub mod metrics;
pub mod nn;
pub mod pinn;
pub mod preprocess;
pub mod record;
pub mod synthetic;
pub mod target;
pub mod turbine;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::empirical::{cp_empirical, fit_least_squares, CpParams, FitConfig};
    pub use crate::error::{Error, Result};
    pub use crate::evidential::{calibration_report, head_transform, nig_predict, NigParams, NigPrediction};
    pub use crate::ingest::{load_dataset, parse_scada_csv, save_dataset, ColumnMap};
    pub use crate::metrics::{compute_metrics, MetricsReport};
    pub use crate::nn::{Activation, Head, MlpModel, TrainConfig};
    pub use crate::pinn::{evaluate, predict_power, train_pinn, PinnConfig};
    pub use crate::preprocess::{clean, noise_floor, split, PreprocessConfig};
    pub use crate::record::{Dataset, Flags, ScadaRecord};
    pub use crate::synthetic::{self, SyntheticConfig};
    pub use crate::target::TargetKind;
    pub use crate::turbine::TurbineParams;
}
