//! Labeled synthetic SCADA generators used by tests, examples and the
//! acceptance suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::empirical::{cp_empirical, CpParams};
use crate::record::{Dataset, ScadaRecord};
use crate::turbine::TurbineParams;

/// Operating points drawn uniformly in (v, β, λ), with Cp from an empirical
/// surface, torque consistent with the clean power and multiplicative
/// Gaussian noise on the reported power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub n_records: usize,
    pub seed: u64,
    /// Relative standard deviation of the power noise.
    pub power_noise: f64,
    pub wind_speed_ms: (f64, f64),
    pub pitch_deg: (f64, f64),
    pub tip_speed_ratio: (f64, f64),
    pub turbine: TurbineParams,
    pub cp: CpParams,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_records: 100_000,
            seed: 2024,
            power_noise: 0.02,
            wind_speed_ms: (3.5, 14.0),
            pitch_deg: (0.0, 10.0),
            tip_speed_ratio: (5.0, 11.0),
            turbine: TurbineParams::MM82,
            cp: CpParams::CLASSIC,
        }
    }
}

/// Draws one clean operating point and its Cp from the configured surface.
fn draw_point(rng: &mut ChaCha8Rng, cfg: &SyntheticConfig) -> (f64, f64, f64, f64) {
    loop {
        let v = rng.random_range(cfg.wind_speed_ms.0..=cfg.wind_speed_ms.1);
        let beta = rng.random_range(cfg.pitch_deg.0..=cfg.pitch_deg.1);
        let lambda = rng.random_range(cfg.tip_speed_ratio.0..=cfg.tip_speed_ratio.1);
        if let Ok(cp) = cp_empirical(lambda, beta, &cfg.cp) {
            if cp > 0.0 {
                let omega = lambda * v / cfg.turbine.rotor_radius_m;
                return (v, beta, omega, cp);
            }
        }
    }
}

/// Records from the empirical Cp surface. Torque satisfies P = g·T·ω for the
/// clean power; the reported power carries the noise.
pub fn classic_cp_dataset(cfg: &SyntheticConfig) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, cfg.power_noise.max(0.0)).expect("finite noise level");
    let records = (0..cfg.n_records)
        .map(|_| {
            let (v, beta, omega, cp) = draw_point(&mut rng, cfg);
            let clean = cp * cfg.turbine.wind_power(v);
            let torque = clean / (cfg.turbine.gear_ratio * omega);
            let power = clean * (1.0 + noise.sample(&mut rng));
            ScadaRecord::new(v, beta, omega, torque, power)
        })
        .collect();
    Dataset::new(records, format!("synthetic-cp[seed={}]", cfg.seed))
}

/// Exact Cp of every record on the generating surface.
pub fn true_cp(dataset: &Dataset, cfg: &SyntheticConfig) -> Vec<f64> {
    dataset
        .records
        .iter()
        .map(|r| {
            let lambda = r.rotor_speed_rads * cfg.turbine.rotor_radius_m / r.wind_speed_ms;
            cp_empirical(lambda, r.pitch_deg, &cfg.cp).expect("generated point lies on the surface")
        })
        .collect()
}

/// Same operating points, but the reported power carries a wind-dependent
/// drivetrain efficiency: P = g·T·ω·(a + b·v). Torque stays consistent with
/// the mechanical power, so P and g·T·ω disagree systematically.
pub fn efficiency_bias_dataset(cfg: &SyntheticConfig, a: f64, b: f64) -> Dataset {
    let mut d = classic_cp_dataset(cfg);
    for r in &mut d.records {
        let mechanical = cfg.turbine.gear_ratio * r.torque_nm * r.rotor_speed_rads;
        let factor = r.power_w / mechanical;
        r.power_w = mechanical * (a + b * r.wind_speed_ms) * factor;
    }
    d.source_label = format!("synthetic-bias[seed={}]", cfg.seed);
    d
}

/// Logistic power curve with gross errors implanted at a known rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnomalyConfig {
    pub n_records: usize,
    pub seed: u64,
    pub rated_power_w: f64,
    pub midpoint_ms: f64,
    pub scale_ms: f64,
    pub wind_speed_ms: (f64, f64),
    pub power_noise: f64,
    /// Fraction of records replaced by gross errors.
    pub anomaly_rate: f64,
    pub turbine: TurbineParams,
}

impl Default for AnomalyConfig {
    fn default() -> Self {
        AnomalyConfig {
            n_records: 50_000,
            seed: 7,
            rated_power_w: 2.0e6,
            midpoint_ms: 9.0,
            scale_ms: 1.3,
            wind_speed_ms: (3.5, 20.0),
            power_noise: 0.01,
            anomaly_rate: 0.05,
            turbine: TurbineParams::MM82,
        }
    }
}

impl AnomalyConfig {
    pub fn curve(&self, v: f64) -> f64 {
        self.rated_power_w / (1.0 + (-(v - self.midpoint_ms) / self.scale_ms).exp())
    }
}

/// Dataset plus the ground-truth anomaly label of every record.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub dataset: Dataset,
    pub is_anomaly: Vec<bool>,
}

/// Records on the logistic curve with small noise. Half of the anomalies are
/// curtailment-like drops to P·U(0, 0.4), the other half positive spikes of
/// P_rated·U(0.2, 0.5). Pitch is fixed at 0 and ω is set by λ = 8.
pub fn anomaly_dataset(cfg: &AnomalyConfig) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, cfg.power_noise.max(0.0)).expect("finite noise level");
    let mut records = Vec::with_capacity(cfg.n_records);
    let mut labels = Vec::with_capacity(cfg.n_records);
    for _ in 0..cfg.n_records {
        let v = rng.random_range(cfg.wind_speed_ms.0..=cfg.wind_speed_ms.1);
        let omega = 8.0 * v / cfg.turbine.rotor_radius_m;
        let clean = cfg.curve(v);
        let mut power = clean * (1.0 + noise.sample(&mut rng));
        let anomalous = rng.random_bool(cfg.anomaly_rate);
        if anomalous {
            power = if rng.random_bool(0.5) {
                clean * rng.random_range(0.0..0.4)
            } else {
                clean + cfg.rated_power_w * rng.random_range(0.2..0.5)
            };
        }
        let torque = power / (cfg.turbine.gear_ratio * omega);
        records.push(ScadaRecord::new(v, 0.0, omega, torque, power));
        labels.push(anomalous);
    }
    LabeledDataset {
        dataset: Dataset::new(records, format!("synthetic-anomaly[seed={}]", cfg.seed)),
        is_anomaly: labels,
    }
}
