//! Run configuration and the command implementations behind the
//! `turbine-pinn` binary. Each command reads and writes files in the run's
//! workspace directory and returns a serializable report.

mod commands;
mod config;

pub use commands::{
    cmd_fit_empirical, cmd_ingest, cmd_power_curve, cmd_predict, cmd_preprocess, cmd_train, EmpiricalOutput,
    IngestOutput, PowerCurveOutput, PredictOutput, PreprocessOutput, TrainOutput, CLEANED_FILE, CP_FIT_FILE,
    CURVE_ESTIMATE_FILE, DATASET_FILE, HISTORY_FILE, METRICS_FILE, MODEL_FILE, POINTS_FILE, POWER_CURVE_FILE,
    REJECTION_REPORT_FILE, TEST_PREDICTIONS_FILE,
};
pub use config::{EmpiricalConfig, ModelSection, Paths, PowerCurveConfig, RunConfig, SplitConfig, Variant};

use crate::error::Error;

/// Process exit code for a command result: 0 success, 2 bad configuration
/// or input, 1 any other failure.
pub fn exit_code<T>(result: &Result<T, Error>) -> i32 {
    match result {
        Ok(_) => 0,
        Err(e) if e.is_input_error() => 2,
        Err(_) => 1,
    }
}
