use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use turbine_pinn::cli::{self, RunConfig};
use turbine_pinn::nn::load_model;
use turbine_pinn::Result;

#[derive(Parser)]
#[command(version, about = "Wind-turbine power modelling from SCADA data")]
struct Args {
    /// Run configuration (TOML).
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a raw SCADA export into the canonical dataset.
    Ingest,
    /// Flag non-physical records, outliers and low-wind readings.
    Preprocess,
    /// Least-squares fit of the empirical Cp surface.
    FitEmpirical,
    /// Train the configured network and evaluate it on the test split.
    Train,
    /// Model power curve with its uncertainty band.
    PowerCurve {
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Predict power for (v, pitch, omega) rows of a CSV file.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Print the default configuration.
    DefaultConfig,
}

fn report<T: Serialize>(value: T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(&value)?);
    Ok(())
}

fn run(args: Args) -> Result<()> {
    let cfg = match &args.config {
        Some(path) => RunConfig::from_toml_file(path)?,
        None => RunConfig::default(),
    };
    match args.command {
        Command::Ingest => report(cli::cmd_ingest(&cfg)?),
        Command::Preprocess => report(cli::cmd_preprocess(&cfg)?),
        Command::FitEmpirical => report(cli::cmd_fit_empirical(&cfg)?),
        Command::Train => report(cli::cmd_train(&cfg)?),
        Command::PowerCurve { model } => {
            let model = model.unwrap_or_else(|| cfg.workspace_file(cli::MODEL_FILE));
            report(cli::cmd_power_curve(&cfg, &model)?)
        }
        Command::Predict { model, input, output } => {
            let model = load_model(model)?;
            report(cli::cmd_predict(&model, &input, &output, &cfg)?)
        }
        Command::DefaultConfig => {
            print!("{}", cfg.to_toml_string()?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let result = run(Args::parse());
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    ExitCode::from(cli::exit_code(&result) as u8)
}
