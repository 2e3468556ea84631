use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::RunConfig;
use crate::empirical::{fit_least_squares, power_metrics, FitResult};
use crate::error::{Error, Result};
use crate::evidential::{calibration_report, CalibrationReport};
use crate::ingest::{format_sig15, load_dataset, parse_scada_csv, save_dataset, write_numeric_csv, IngestReport};
use crate::metrics::MetricsReport;
use crate::nn::{load_model, save_model, Head, MlpModel};
use crate::pinn::{evaluate, predict_power_with_uncertainty, train_pinn};
use crate::preprocess::{clean, median, noise_floor, split_with, PipelineReport, PowerCurveEstimate, SplitMode};
use crate::record::{Dataset, ScadaRecord};

pub const DATASET_FILE: &str = "dataset.csv";
pub const CLEANED_FILE: &str = "cleaned.csv";
pub const REJECTION_REPORT_FILE: &str = "rejection_report.json";
pub const CURVE_ESTIMATE_FILE: &str = "power_curve_estimate.csv";
pub const POINTS_FILE: &str = "power_curve_points.csv";
pub const CP_FIT_FILE: &str = "cp_fit.json";
pub const MODEL_FILE: &str = "model.json";
pub const HISTORY_FILE: &str = "history.csv";
pub const METRICS_FILE: &str = "metrics.json";
pub const TEST_PREDICTIONS_FILE: &str = "test_predictions.csv";
pub const POWER_CURVE_FILE: &str = "power_curve.csv";

/// Bins per variable in the distribution histograms.
const HISTOGRAM_BINS: usize = 50;

fn ensure_workspace(cfg: &RunConfig) -> Result<()> {
    let dir = &cfg.paths.workspace;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn load_cleaned(cfg: &RunConfig) -> Result<Dataset> {
    load_dataset(cfg.workspace_file(CLEANED_FILE))
}

fn split_cleaned(cfg: &RunConfig) -> Result<(Dataset, Dataset)> {
    let cleaned = load_cleaned(cfg)?;
    split_with(&cleaned, cfg.split.train_fraction, cfg.seed, cfg.split.mode)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestOutput {
    pub dataset: PathBuf,
    pub report: IngestReport,
}

/// Raw CSV → canonical `dataset.csv`.
pub fn cmd_ingest(cfg: &RunConfig) -> Result<IngestOutput> {
    let raw = cfg
        .paths
        .raw_data
        .as_ref()
        .ok_or_else(|| Error::Config("paths.raw_data is not set".into()))?;
    let (dataset, report) = parse_scada_csv(raw, &cfg.columns)?;
    ensure_workspace(cfg)?;
    let out = cfg.workspace_file(DATASET_FILE);
    save_dataset(&dataset, &out)?;
    Ok(IngestOutput { dataset: out, report })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreprocessOutput {
    pub report: PipelineReport,
    /// MAPE (%) between P and g·T·ω on the retained records.
    pub noise_floor_mape: Option<f64>,
}

/// Applies the three filters and writes the cleaned dataset (all records,
/// with flags), the rejection report, the binned curve estimate, the
/// flagged scatter and one histogram per variable.
pub fn cmd_preprocess(cfg: &RunConfig) -> Result<PreprocessOutput> {
    let mut dataset = load_dataset(cfg.workspace_file(DATASET_FILE))?;
    dataset.clear_flags();
    let (curve, report) = clean(&mut dataset, &cfg.turbine, &cfg.preprocess)?;
    let noise_floor_mape = noise_floor(&dataset, &cfg.turbine).ok();
    ensure_workspace(cfg)?;
    save_dataset(&dataset, cfg.workspace_file(CLEANED_FILE))?;
    let output = PreprocessOutput {
        report,
        noise_floor_mape,
    };
    write_json(&cfg.workspace_file(REJECTION_REPORT_FILE), &output)?;
    write_curve_estimate(&cfg.workspace_file(CURVE_ESTIMATE_FILE), &curve)?;
    write_points(&cfg.workspace_file(POINTS_FILE), &dataset)?;
    write_histograms(cfg, &dataset)?;
    Ok(output)
}

fn write_curve_estimate(path: &Path, curve: &PowerCurveEstimate) -> Result<()> {
    let rows = (0..curve.n_bins()).filter_map(|i| {
        let m = curve.bin_median_power_w[i]?;
        Some(vec![
            curve.bin_center(i),
            m / 1e3,
            curve.bin_sigma_w[i].unwrap_or(f64::NAN) / 1e3,
            curve.bin_counts[i] as f64,
        ])
    });
    write_numeric_csv(path, &["wind_speed_ms", "median_power_kw", "sigma_kw", "n"], rows)
}

fn write_points(path: &Path, dataset: &Dataset) -> Result<()> {
    let mut out = String::from("wind_speed_ms,power_kw,flags\n");
    for r in &dataset.records {
        out.push_str(&format!(
            "{},{},{}\n",
            format_sig15(r.wind_speed_ms),
            format_sig15(r.power_w / 1e3),
            r.flags
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn write_histograms(cfg: &RunConfig, dataset: &Dataset) -> Result<()> {
    let columns: [(&str, fn(&ScadaRecord) -> f64); 5] = [
        ("wind_speed_ms", |r| r.wind_speed_ms),
        ("pitch_deg", |r| r.pitch_deg),
        ("rotor_speed_rads", |r| r.rotor_speed_rads),
        ("torque_nm", |r| r.torque_nm),
        ("power_w", |r| r.power_w),
    ];
    for (name, get) in columns {
        let values: Vec<f64> = dataset.retained().map(get).collect();
        if values.is_empty() {
            continue;
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = if hi > lo { (hi - lo) / HISTOGRAM_BINS as f64 } else { 1.0 };
        let mut counts = vec![0usize; HISTOGRAM_BINS];
        for v in values {
            let i = (((v - lo) / width) as usize).min(HISTOGRAM_BINS - 1);
            counts[i] += 1;
        }
        let rows = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| vec![lo + i as f64 * width, lo + (i + 1) as f64 * width, c as f64]);
        write_numeric_csv(
            &cfg.workspace_file(&format!("hist_{name}.csv")),
            &["bin_lo", "bin_hi", "count"],
            rows,
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalOutput {
    pub fit: FitResult,
    /// Metrics (kW) on the held-out split.
    pub test_metrics: MetricsReport,
}

/// Least-squares fit of the empirical Cp surface on the training split.
/// A fit that does not converge is written out and reported as an error.
pub fn cmd_fit_empirical(cfg: &RunConfig) -> Result<EmpiricalOutput> {
    let (train, test) = split_cleaned(cfg)?;
    let fit = fit_least_squares(&train, &cfg.turbine, &cfg.empirical.init, &cfg.empirical.fit)?;
    let test_metrics = power_metrics(&test, &cfg.turbine, &fit.params)?;
    let output = EmpiricalOutput { fit, test_metrics };
    ensure_workspace(cfg)?;
    write_json(&cfg.workspace_file(CP_FIT_FILE), &output)?;
    if !output.fit.diagnostics.converged {
        return Err(Error::FitFailed(format!(
            "no convergence after {} iterations; diagnostics in {}",
            output.fit.diagnostics.iterations,
            cfg.workspace_file(CP_FIT_FILE).display()
        )));
    }
    Ok(output)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainOutput {
    pub target: String,
    pub variant: String,
    pub evidential: bool,
    pub epochs_run: usize,
    /// Predicted power against measured power, kW.
    pub data: MetricsReport,
    /// Predicted power against g·T·ω, kW.
    pub phys: MetricsReport,
    pub calibration: Option<CalibrationReport>,
}

/// Trains the configured variant and evaluates it on the held-out split.
pub fn cmd_train(cfg: &RunConfig) -> Result<TrainOutput> {
    let pinn_cfg = cfg.pinn_config()?;
    let (train, test) = split_cleaned(cfg)?;
    let trained = match cfg.split.validation_fraction {
        f if f == 0.0 => train_pinn(&pinn_cfg, &train, &test, &cfg.turbine)?,
        f => {
            let (fit, val) = split_with(&train, 1.0 - f, cfg.seed.wrapping_add(1), SplitMode::Random)?;
            train_pinn(&pinn_cfg, &fit, &val, &cfg.turbine)?
        }
    };
    let eval = evaluate(&trained.model, &test, &cfg.turbine)?;

    let measured: Vec<f64> = test.retained().map(|r| r.power_w).collect();
    let calibration = match &eval.sigma_power_w {
        Some(s) => Some(calibration_report(&eval.predicted_power_w, s, &measured)?),
        None => None,
    };

    ensure_workspace(cfg)?;
    save_model(&trained.model, cfg.workspace_file(MODEL_FILE))?;
    trained.history.save_csv(cfg.workspace_file(HISTORY_FILE))?;
    let rows = test.retained().enumerate().map(|(i, r)| {
        let mut row = vec![r.wind_speed_ms, r.pitch_deg, r.rotor_speed_rads, r.power_w, eval.predicted_power_w[i]];
        if let Some(s) = &eval.sigma_power_w {
            row.push(s[i]);
        }
        row
    });
    let mut header = vec!["v", "beta", "omega", "true_power_w", "predicted_power_w"];
    if eval.sigma_power_w.is_some() {
        header.push("sigma_power_w");
    }
    write_numeric_csv(&cfg.workspace_file(TEST_PREDICTIONS_FILE), &header, rows)?;

    let output = TrainOutput {
        target: pinn_cfg.target_kind.to_string(),
        variant: if pinn_cfg.is_pinn() { "pinn" } else { "nn" }.into(),
        evidential: trained.model.head == Head::Evidential,
        epochs_run: trained.history.len(),
        data: eval.data,
        phys: eval.phys,
        calibration,
    };
    write_json(&cfg.workspace_file(METRICS_FILE), &output)?;
    Ok(output)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerCurveOutput {
    pub path: PathBuf,
    pub bins_written: usize,
    pub bins_empty: usize,
    pub has_band: bool,
}

fn load_manufacturer_curve(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Malformed {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let mut curve = Vec::new();
    for row in reader.records() {
        let row = row?;
        let parse = |i: usize| row.get(i).and_then(|s| s.trim().parse::<f64>().ok());
        match (parse(0), parse(1)) {
            (Some(v), Some(p)) => curve.push((v, p)),
            _ => {
                return Err(Error::Malformed {
                    path: path.to_path_buf(),
                    reason: format!("bad row {:?}", row),
                })
            }
        }
    }
    curve.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(curve)
}

fn interpolate(curve: &[(f64, f64)], v: f64) -> Option<f64> {
    let k = curve.partition_point(|&(x, _)| x < v);
    if k < curve.len() && curve[k].0 == v {
        return Some(curve[k].1);
    }
    if k == 0 || k == curve.len() {
        return None;
    }
    let (x0, y0) = curve[k - 1];
    let (x1, y1) = curve[k];
    Some(y0 + (y1 - y0) * (v - x0) / (x1 - x0))
}

/// Model power curve over wind-speed bins of the cleaned training split,
/// evaluated at each bin's median pitch and rotor speed.
pub fn cmd_power_curve(cfg: &RunConfig, model_path: &Path) -> Result<PowerCurveOutput> {
    let model = load_model(model_path)?;
    let (train, _) = split_cleaned(cfg)?;
    let manufacturer = match &cfg.paths.manufacturer_curve {
        Some(p) => Some(load_manufacturer_curve(p)?),
        None => None,
    };
    let has_band = model.head == Head::Evidential;
    if !has_band {
        log::warn!("model has no evidential head; band columns omitted");
    }
    let width = cfg.power_curve.bin_width_ms;
    if !(width > 0.0) {
        return Err(Error::Config("power_curve.bin_width_ms must be positive".into()));
    }
    let retained: Vec<&ScadaRecord> = train.retained().collect();
    if retained.is_empty() {
        return Err(Error::Empty("training split"));
    }
    let v_lo = retained.iter().map(|r| r.wind_speed_ms).fold(f64::INFINITY, f64::min);
    let v_hi = retained.iter().map(|r| r.wind_speed_ms).fold(f64::NEG_INFINITY, f64::max);
    let first = (v_lo / width).floor() as i64;
    let last = (v_hi / width).floor() as i64;
    let n_bins = (last - first + 1) as usize;
    let mut bins: Vec<Vec<&ScadaRecord>> = vec![Vec::new(); n_bins];
    for r in &retained {
        let i = ((r.wind_speed_ms / width).floor() as i64 - first) as usize;
        bins[i.min(n_bins - 1)].push(r);
    }

    let mut points = Vec::new();
    let mut data_median = Vec::new();
    let mut centers = Vec::new();
    let mut empty = 0;
    for (i, bin) in bins.iter().enumerate() {
        if bin.is_empty() {
            empty += 1;
            continue;
        }
        let center = (first + i as i64) as f64 * width + width / 2.0;
        let mut pitch: Vec<f64> = bin.iter().map(|r| r.pitch_deg).collect();
        let mut omega: Vec<f64> = bin.iter().map(|r| r.rotor_speed_rads).collect();
        let mut power: Vec<f64> = bin.iter().map(|r| r.power_w).collect();
        points.push([center, median(&mut pitch), median(&mut omega)]);
        data_median.push(median(&mut power));
        centers.push(center);
    }
    let preds = predict_power_with_uncertainty(&model, &points, &cfg.turbine)?;

    let mut header = vec!["wind_speed_ms", "model_power_kw"];
    if has_band {
        header.extend(["model_lower_kw", "model_upper_kw"]);
    }
    header.push("data_median_kw");
    if manufacturer.is_some() {
        header.push("manufacturer_kw");
    }
    let k = cfg.power_curve.band_sigmas;
    let rows = preds.iter().enumerate().map(|(i, p)| {
        let mut row = vec![centers[i], p.power_w / 1e3];
        if let Some(s) = p.sigma_w {
            row.extend([(p.power_w - k * s) / 1e3, (p.power_w + k * s) / 1e3]);
        }
        row.push(data_median[i] / 1e3);
        if let Some(m) = &manufacturer {
            row.push(interpolate(m, centers[i]).map_or(f64::NAN, |x| x / 1e3));
        }
        row
    });
    ensure_workspace(cfg)?;
    let path = cfg.workspace_file(POWER_CURVE_FILE);
    write_numeric_csv(&path, &header, rows)?;
    Ok(PowerCurveOutput {
        path,
        bins_written: preds.len(),
        bins_empty: empty,
        has_band,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictOutput {
    pub rows_written: usize,
    pub rows_skipped: usize,
}

/// Predicts power for the first three columns (v, β, ω) of `input`.
/// Rows that do not parse are skipped and counted.
pub fn cmd_predict(model: &MlpModel, input: &Path, output: &Path, cfg: &RunConfig) -> Result<PredictOutput> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(input)
        .map_err(|e| Error::Malformed {
            path: input.to_path_buf(),
            reason: e.to_string(),
        })?;
    let mut points = Vec::new();
    let mut skipped = 0;
    for row in reader.records() {
        let parsed = row.ok().and_then(|row| {
            let get = |i: usize| row.get(i).and_then(|s| s.parse::<f64>().ok()).filter(|x| x.is_finite());
            Some([get(0)?, get(1)?, get(2)?])
        });
        match parsed {
            Some(p) => points.push(p),
            None => skipped += 1,
        }
    }
    if skipped > 0 {
        log::warn!("{skipped} malformed rows skipped in {}", input.display());
    }
    let preds = predict_power_with_uncertainty(model, &points, &cfg.turbine)?;
    let has_sigma = model.head == Head::Evidential;
    let mut header = vec!["v", "beta", "omega", "predicted_power_w"];
    if has_sigma {
        header.push("sigma_power_w");
    }
    let rows = points.iter().zip(&preds).map(|(x, p)| {
        let mut row = vec![x[0], x[1], x[2], p.power_w];
        if let Some(s) = p.sigma_w {
            row.push(s);
        }
        row
    });
    write_numeric_csv(output, &header, rows)?;
    Ok(PredictOutput {
        rows_written: points.len(),
        rows_skipped: skipped,
    })
}
