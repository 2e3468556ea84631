//! Oracles and fixtures shared by the integration tests. Nothing here calls
//! into the code paths it is used to check.

#![allow(dead_code)]

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use turbine_pinn::evidential::NigParams;
use turbine_pinn::nn::{grad_check, Activation, Batch, Head, MlpModel, Objective};
use turbine_pinn::pinn::prepare_samples;
use turbine_pinn::preprocess::fit_scaler;
use turbine_pinn::synthetic::{classic_cp_dataset, SyntheticConfig};
use turbine_pinn::target::TargetKind;
use turbine_pinn::turbine::TurbineParams;

fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let n = if n % 2 == 1 { n + 1 } else { n };
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// −ln ∫∫ N(y | μ, σ²) · N(μ | γ, σ²/ν) · InvGamma(σ² | α, β) dμ dσ², by
/// Simpson quadrature over μ and s = ln σ². The inverse-gamma normalizer is
/// itself integrated numerically so no special function is involved.
pub fn nig_nll_quadrature(y: f64, p: &NigParams) -> f64 {
    let (gamma, nu, alpha, beta) = (p.gamma_loc, p.nu, p.alpha, p.beta_scale);
    let (s_lo, s_hi, n_s) = (-25.0, 40.0, 6000);
    // unnormalized log inverse-gamma density in s, Jacobian included
    let log_ig = |s: f64| -alpha * s - beta * (-s).exp();
    let peak = (beta / alpha).ln();
    let shift = log_ig(peak);
    let z = simpson(s_lo, s_hi, n_s, |s| (log_ig(s) - shift).exp());

    let inner = |s: f64| {
        let var = s.exp();
        let sd = var.sqrt();
        let center = (y + nu * gamma) / (1.0 + nu);
        let spread = 12.0 * sd / (1.0 + nu).sqrt();
        let norm = |x: f64, m: f64, v: f64| (-(x - m) * (x - m) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt();
        simpson(center - spread, center + spread, 400, |mu| norm(y, mu, var) * norm(mu, gamma, var / nu))
    };
    let joint = simpson(s_lo, s_hi, n_s, |s| {
        let w = (log_ig(s) - shift).exp();
        if w < 1e-300 {
            0.0
        } else {
            w * inner(s)
        }
    });
    -(joint / z).ln()
}

/// Gaussian residuals with honestly reported σ: (predictions, sigmas, targets).
pub fn honest_gaussian(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut preds = Vec::with_capacity(n);
    let mut sigmas = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let mean: f64 = rng.random_range(-100.0..100.0);
        let sigma: f64 = rng.random_range(0.1..10.0);
        let z: f64 = StandardNormal.sample(&mut rng);
        preds.push(mean);
        sigmas.push(sigma);
        targets.push(mean + sigma * z);
    }
    (preds, sigmas, targets)
}

/// Standard normal two-sided coverage at 1, 2 and 3 σ.
pub const GAUSSIAN_COVERAGE: [f64; 3] = [0.682_689_492, 0.954_499_736, 0.997_300_204];

pub fn random_batch(n: usize, width: usize, seed: u64) -> (Array2<f64>, Array1<f64>, Array1<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Array2::from_shape_fn((n, width), |_| rng.random_range(-2.0..2.0));
    let y = Array1::from_shape_fn(n, |_| rng.random_range(-1.5..1.5));
    let phys = Array1::from_shape_fn(n, |i| y[i] + rng.random_range(-0.3..0.3));
    (x, y, phys)
}

/// Relative difference with the same absolute floor for both sides.
pub fn rel(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / a.abs().max(b.abs()).max(1e-300)
    }
}

/// Loss families checked against central differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradFamily {
    Mae,
    Pinn(TargetKind),
    Evidential,
}

pub const GRAD_FAMILIES: [GradFamily; 5] = [
    GradFamily::Mae,
    GradFamily::Pinn(TargetKind::Power),
    GradFamily::Pinn(TargetKind::Cp),
    GradFamily::Pinn(TargetKind::Torque),
    GradFamily::Evidential,
];

/// Worst relative gradient error over `seeds` random 3×16×16×k tanh
/// networks and 32-record batches. PINN batches carry real standardized
/// physics targets of the given kind from noisy synthetic records.
pub fn worst_gradient_error(family: GradFamily, seeds: std::ops::Range<u64>) -> f64 {
    let params = TurbineParams::MM82;
    let mut worst = 0.0f64;
    for seed in seeds {
        let (head, objective, kind) = match family {
            GradFamily::Mae => (Head::Point, Objective::MAE, TargetKind::Power),
            GradFamily::Pinn(kind) => (Head::Point, Objective::pinn(1.0), kind),
            GradFamily::Evidential => (Head::Evidential, Objective::evidential(0.01), TargetKind::Power),
        };
        let width = if head == Head::Evidential { 4 } else { 1 };
        let model = MlpModel::with_head(&[3, 16, 16, width], Activation::Tanh, head, seed).unwrap();
        let data = classic_cp_dataset(&SyntheticConfig {
            n_records: 32,
            seed: 1000 + seed,
            ..SyntheticConfig::default()
        });
        let scaler = fit_scaler(&data, kind, &params).unwrap();
        let samples = prepare_samples(&data, &scaler, kind, &params, true).unwrap();
        let full = samples.view();
        let batch = Batch {
            physics: if matches!(family, GradFamily::Pinn(_)) { full.physics } else { None },
            ..full
        };
        worst = worst.max(grad_check(&model, &batch, &objective, 1e-5).unwrap());
    }
    worst
}

/// Worst relative deviation over `n` random operating points of the
/// torque/power and Cp/power round trips and of the Cp physics target
/// against the literal 2gTω/(ρAv³).
pub fn physics_identity_worst(n: usize, seed: u64) -> f64 {
    use turbine_pinn::record::ScadaRecord;
    use turbine_pinn::turbine::{cp_from_power, power_from_cp, power_from_torque, torque_from_power};

    let p = TurbineParams::MM82;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..n {
        let v: f64 = rng.random_range(0.2..30.0);
        let omega: f64 = rng.random_range(0.01..3.0);
        let torque: f64 = rng.random_range(0.0..60_000.0);
        let cp: f64 = rng.random_range(0.0..0.5926);
        let power = rng.random_range(-1e5..4e6);

        let t_back = torque_from_power(power_from_torque(torque, omega, &p).unwrap(), omega, &p).unwrap();
        let cp_back = cp_from_power(power_from_cp(cp, v, &p).unwrap(), v, &p).unwrap();
        let r = ScadaRecord::new(v, 0.0, omega, torque, power);
        let physics = TargetKind::Cp.physics_target(&r, &p).unwrap();
        let literal = 2.0 * 106.0 * torque * omega / (1.225 * 5281.0 * v * v * v);
        let torque_phys = TargetKind::Torque.physics_target(&r, &p).unwrap();

        worst = worst
            .max(rel(t_back, torque))
            .max(rel(cp_back, cp))
            .max(rel(physics, literal))
            .max(rel(torque_phys, power / (106.0 * omega)));
    }
    worst
}

use turbine_pinn::preprocess::{clean, PreprocessConfig};
use turbine_pinn::record::{Dataset, Flags};
use turbine_pinn::synthetic::{anomaly_dataset, AnomalyConfig};

/// (recall on implanted anomalies, flag rate on clean records) after the
/// full cleaning pipeline.
pub fn anomaly_scores(cfg: &AnomalyConfig) -> (f64, f64) {
    let labeled = anomaly_dataset(cfg);
    let mut data = labeled.dataset;
    clean(&mut data, &TurbineParams::MM82, &PreprocessConfig::default()).unwrap();
    let (mut hit, mut n_anom, mut false_flag, mut n_clean) = (0usize, 0usize, 0usize, 0usize);
    for (r, &anomalous) in data.records.iter().zip(&labeled.is_anomaly) {
        let flagged = !r.flags.is_empty();
        if anomalous {
            n_anom += 1;
            hit += flagged as usize;
        } else {
            n_clean += 1;
            false_flag += flagged as usize;
        }
    }
    (hit as f64 / n_anom as f64, false_flag as f64 / n_clean as f64)
}

/// Flags after cleaning, and after cleaning the already cleaned dataset
/// once more.
pub fn clean_twice(mut data: Dataset) -> (Vec<Flags>, Vec<Flags>) {
    let params = TurbineParams::MM82;
    let cfg = PreprocessConfig::default();
    clean(&mut data, &params, &cfg).unwrap();
    let first: Vec<Flags> = data.records.iter().map(|r| r.flags).collect();
    clean(&mut data, &params, &cfg).unwrap();
    let second = data.records.iter().map(|r| r.flags).collect();
    (first, second)
}

/// Flags of a cleaned dataset and of the same records cleaned in a
/// shuffled order, mapped back to the original order.
pub fn clean_permuted(data: &Dataset, seed: u64) -> (Vec<Flags>, Vec<Flags>) {
    use rand::seq::SliceRandom;
    let params = TurbineParams::MM82;
    let cfg = PreprocessConfig::default();
    let mut a = data.clone();
    clean(&mut a, &params, &cfg).unwrap();

    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut b = Dataset::new(order.iter().map(|&i| data.records[i]).collect(), "shuffled");
    clean(&mut b, &params, &cfg).unwrap();
    let mut back = vec![Flags::empty(); data.len()];
    for (k, &i) in order.iter().enumerate() {
        back[i] = b.records[k].flags;
    }
    (a.records.iter().map(|r| r.flags).collect(), back)
}
