use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use turbine_pinn::ingest::format_sig15;
use turbine_pinn::record::Dataset;
use turbine_pinn::synthetic::{anomaly_dataset, classic_cp_dataset, AnomalyConfig, SyntheticConfig};

fn write_raw(path: &Path, data: &Dataset, columns: &[&str]) {
    let mut text = columns.join(",");
    text.push('\n');
    for r in &data.records {
        let all = [
            ("wind_speed_ms", r.wind_speed_ms),
            ("pitch_deg", r.pitch_deg),
            ("rotor_speed_rads", r.rotor_speed_rads),
            ("torque_nm", r.torque_nm),
            ("power_w", r.power_w),
        ];
        let row: Vec<String> = columns
            .iter()
            .map(|c| format_sig15(all.iter().find(|(n, _)| n == c).unwrap().1))
            .collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(path, text).unwrap();
}

const ALL_COLUMNS: [&str; 5] = ["wind_speed_ms", "pitch_deg", "rotor_speed_rads", "torque_nm", "power_w"];

struct Run {
    dir: TempDir,
}

impl Run {
    fn new(data: &Dataset, extra_toml: &str) -> Run {
        let dir = tempfile::tempdir().unwrap();
        write_raw(&dir.path().join("raw.csv"), data, &ALL_COLUMNS);
        let toml = format!("seed = 7\n[paths]\nraw_data = \"raw.csv\"\nworkspace = \"ws\"\n{extra_toml}");
        fs::write(dir.path().join("run.toml"), toml).unwrap();
        Run { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn ws(&self, name: &str) -> PathBuf {
        self.dir.path().join("ws").join(name)
    }

    fn cli(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_turbine-pinn"))
            .arg("--config")
            .arg(self.path("run.toml"))
            .args(args)
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> Value {
        let out = self.cli(args);
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        serde_json::from_slice(&out.stdout).unwrap()
    }

    fn rewrite_config(&self, extra_toml: &str) {
        let toml = format!("seed = 7\n[paths]\nraw_data = \"raw.csv\"\nworkspace = \"ws\"\n{extra_toml}");
        fs::write(self.path("run.toml"), toml).unwrap();
    }
}

fn small(n: usize, noise: f64) -> Dataset {
    classic_cp_dataset(&SyntheticConfig {
        n_records: n,
        power_noise: noise,
        ..SyntheticConfig::default()
    })
}

#[test]
fn ingest_is_deterministic() {
    let run = Run::new(&small(500, 0.02), "");
    let report = run.ok(&["ingest"]);
    assert_eq!(report["report"]["rows_kept"], 500);
    let first = fs::read(run.ws("dataset.csv")).unwrap();
    run.ok(&["ingest"]);
    assert_eq!(first, fs::read(run.ws("dataset.csv")).unwrap());
}

#[test]
fn missing_column_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    write_raw(
        &dir.path().join("raw.csv"),
        &small(10, 0.0),
        &["wind_speed_ms", "pitch_deg", "rotor_speed_rads", "power_w"],
    );
    fs::write(dir.path().join("run.toml"), "[paths]\nraw_data = \"raw.csv\"\nworkspace = \"ws\"\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_turbine-pinn"))
        .args(["--config", dir.path().join("run.toml").to_str().unwrap(), "ingest"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("torque_nm"));
}

#[test]
fn bad_config_exits_with_two() {
    let run = Run::new(&small(10, 0.0), "[model]\ntarget = \"speed\"\n");
    assert_eq!(run.cli(&["ingest"]).status.code(), Some(2));
    let run = Run::new(&small(10, 0.0), "");
    // preprocess before ingest: the dataset file does not exist
    assert_eq!(run.cli(&["preprocess"]).status.code(), Some(2));
}

#[test]
fn preprocess_reports_the_implanted_rate() {
    let labeled = anomaly_dataset(&AnomalyConfig {
        n_records: 20_000,
        ..AnomalyConfig::default()
    });
    let implanted = labeled.is_anomaly.iter().filter(|&&a| a).count() as f64 / 20_000.0;
    let run = Run::new(&labeled.dataset, "");
    run.ok(&["ingest"]);
    let out = run.ok(&["preprocess"]);
    let rejected = out["report"]["rejected"].as_f64().unwrap() / 20_000.0;
    assert!((rejected - implanted).abs() <= 0.02, "{rejected} vs {implanted}");
    for file in ["cleaned.csv", "rejection_report.json", "power_curve_estimate.csv", "power_curve_points.csv"] {
        assert!(run.ws(file).exists(), "{file}");
    }
    for var in ["wind_speed_ms", "pitch_deg", "rotor_speed_rads", "torque_nm", "power_w"] {
        let hist = fs::read_to_string(run.ws(&format!("hist_{var}.csv"))).unwrap();
        assert_eq!(hist.lines().count(), 51, "{var}");
    }
    let report: Value = serde_json::from_str(&fs::read_to_string(run.ws("rejection_report.json")).unwrap()).unwrap();
    assert_eq!(report, out);
}

#[test]
fn empirical_fit_on_exact_data_and_far_start() {
    let run = Run::new(&small(3000, 0.0), "");
    run.ok(&["ingest"]);
    run.ok(&["preprocess"]);
    let out = run.ok(&["fit-empirical"]);
    assert_eq!(out["fit"]["diagnostics"]["converged"], true);
    assert!(out["fit"]["diagnostics"]["cp_rmse"].as_f64().unwrap() < 1e-6);
    assert!(out["test_metrics"]["mape"].as_f64().unwrap() < 1e-3);

    run.rewrite_config("[empirical.init]\nc1 = 10000.0\nc6 = 200.0\n");
    let out = run.cli(&["fit-empirical"]);
    assert_eq!(out.status.code(), Some(1));
    let written: Value = serde_json::from_str(&fs::read_to_string(run.ws("cp_fit.json")).unwrap()).unwrap();
    assert_eq!(written["fit"]["diagnostics"]["converged"], false);
}

#[test]
fn zero_weight_pinn_matches_plain_network() {
    let run = Run::new(&small(3000, 0.02), "[model]\ntarget = \"cp\"\nepochs = 3\n");
    run.ok(&["ingest"]);
    run.ok(&["preprocess"]);
    let plain = run.ok(&["train"]);
    let plain_history = fs::read(run.ws("history.csv")).unwrap();
    run.rewrite_config("[model]\ntarget = \"cp\"\nvariant = \"pinn\"\nphysics_weight = 0.0\nepochs = 3\n");
    let zero = run.ok(&["train"]);
    assert_eq!(plain["data"], zero["data"]);
    assert_eq!(plain["phys"], zero["phys"]);
    assert_eq!(plain_history, fs::read(run.ws("history.csv")).unwrap());
    assert_eq!(zero["variant"], "nn");
}

#[test]
fn consistent_data_gives_equal_data_and_phys_metrics() {
    let run = Run::new(&small(2000, 0.0), "[model]\nepochs = 2\n");
    run.ok(&["ingest"]);
    run.ok(&["preprocess"]);
    let out = run.ok(&["train"]);
    for m in ["mae", "rmse", "mape"] {
        let (d, p) = (out["data"][m].as_f64().unwrap(), out["phys"][m].as_f64().unwrap());
        assert!((d - p).abs() <= 1e-6 * d.abs().max(1.0), "{m}: {d} vs {p}");
    }
    assert!(out["data"]["mau"].is_null());
    assert!(out["calibration"].is_null());
}

#[test]
fn evidential_run_power_curve_and_predict() {
    let run = Run::new(&small(4000, 0.02), "[model]\ntarget = \"torque\"\nevidential = true\nepochs = 3\n");
    let manufacturer = "v,p\n3,0\n8,700000\n15,2050000\n";
    fs::write(run.path("maker.csv"), manufacturer).unwrap();
    run.ok(&["ingest"]);
    run.ok(&["preprocess"]);
    let out = run.ok(&["train"]);
    assert!(out["data"]["mau"].as_f64().unwrap() > 0.0);
    assert_eq!(out["calibration"]["coverage"].as_array().unwrap().len(), 3);
    let preds = fs::read_to_string(run.ws("test_predictions.csv")).unwrap();
    assert!(preds.starts_with("v,beta,omega,true_power_w,predicted_power_w,sigma_power_w\n"));

    fs::write(
        run.path("run.toml"),
        "seed = 7\n[paths]\nraw_data = \"raw.csv\"\nworkspace = \"ws\"\nmanufacturer_curve = \"maker.csv\"\n",
    )
    .unwrap();
    let curve = run.ok(&["power-curve"]);
    assert_eq!(curve["has_band"], true);
    let text = fs::read_to_string(run.ws("power_curve.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "wind_speed_ms,model_power_kw,model_lower_kw,model_upper_kw,data_median_kw,manufacturer_kw"
    );
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!(v[2] <= v[1] && v[1] <= v[3], "{line}");
        assert!((3.5..=14.5).contains(&v[0]), "{line}");
    }
    assert_eq!(curve["bins_written"].as_u64().unwrap() as usize, text.lines().count() - 1);

    fs::write(run.path("points.csv"), "v,beta,omega\n8,1,1.4\nbad,1,1\n10,2\n11,0.5,2.0\n").unwrap();
    let model = run.ws("model.json");
    let out = run.ok(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--input",
        run.path("points.csv").to_str().unwrap(),
        "--output",
        run.path("pred.csv").to_str().unwrap(),
    ]);
    assert_eq!(out["rows_written"], 2);
    assert_eq!(out["rows_skipped"], 2);
    let pred = fs::read_to_string(run.path("pred.csv")).unwrap();
    assert_eq!(pred.lines().count(), 3);
    assert!(pred.starts_with("v,beta,omega,predicted_power_w,sigma_power_w\n"));
}

#[test]
fn point_model_curve_has_no_band() {
    let run = Run::new(&small(2000, 0.02), "[model]\nepochs = 1\n");
    run.ok(&["ingest"]);
    run.ok(&["preprocess"]);
    run.ok(&["train"]);
    let out = run.cli(&["power-curve"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("band columns omitted"));
    let text = fs::read_to_string(run.ws("power_curve.csv")).unwrap();
    assert!(text.starts_with("wind_speed_ms,model_power_kw,data_median_kw\n"));
}

#[test]
fn default_config_round_trips() {
    let out = Command::new(env!("CARGO_BIN_EXE_turbine-pinn")).arg("default-config").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let cfg = turbine_pinn::cli::RunConfig::from_toml_str(&text).unwrap();
    assert_eq!(cfg, turbine_pinn::cli::RunConfig::default());
}

#[test]
fn evidential_curve_band_covers_the_true_curve() {
    let cfg = AnomalyConfig {
        n_records: 20_000,
        anomaly_rate: 0.0,
        wind_speed_ms: (3.5, 16.0),
        ..AnomalyConfig::default()
    };
    // pitch jitter that the power does not depend on keeps the feature non-constant
    let mut data = anomaly_dataset(&cfg).dataset;
    for (i, r) in data.records.iter_mut().enumerate() {
        r.pitch_deg = (i % 7) as f64 * 0.25;
    }
    let run = Run::new(&data, "[model]\nevidential = true\nepochs = 40\n");
    run.ok(&["ingest"]);
    run.ok(&["preprocess"]);
    run.ok(&["train"]);
    run.ok(&["power-curve"]);
    let text = fs::read_to_string(run.ws("power_curve.csv")).unwrap();
    let (mut inside, mut total) = (0, 0);
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let truth = cfg.curve(v[0]) / 1e3;
        total += 1;
        inside += (v[2] <= truth && truth <= v[3]) as usize;
    }
    let share = inside as f64 / total as f64;
    assert!(share >= 0.95, "{inside}/{total}\n{text}");
}
