//! Exponential power-coefficient model
//!
//! ```text
//! Cp(λ, β) = c0·(c1·γ − c2·β − c3·β^c4 − c5)·exp(−c6·γ) + c7·λ
//! γ        = 1/(λ + d0·β + d1) − d2/(1 + β³)
//! ```
//!
//! and its damped least-squares fit to measured Cp.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{compute_metrics, MetricsReport};
use crate::record::Dataset;
use crate::turbine::{self, TurbineParams, V_MIN};

/// Guard on the γ denominators.
pub const POLE_EPS: f64 = 1e-9;

pub const N_PARAMS: usize = 11;
pub const PARAM_NAMES: [&str; N_PARAMS] = ["c0", "c1", "c2", "c3", "c4", "c5", "c6", "c7", "d0", "d1", "d2"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CpParams {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
    pub c7: f64,
    pub d0: f64,
    pub d1: f64,
    pub d2: f64,
}

impl CpParams {
    /// The widely published exponential parameter set
    /// c = (0.5176, 116, 0.4, 0, 2, 5, 21, 0.0068), d = (0.08, 0, 0.035).
    pub const CLASSIC: CpParams = CpParams {
        c0: 0.5176,
        c1: 116.0,
        c2: 0.4,
        c3: 0.0,
        c4: 2.0,
        c5: 5.0,
        c6: 21.0,
        c7: 0.0068,
        d0: 0.08,
        d1: 0.0,
        d2: 0.035,
    };

    pub fn to_array(&self) -> [f64; N_PARAMS] {
        [
            self.c0, self.c1, self.c2, self.c3, self.c4, self.c5, self.c6, self.c7, self.d0, self.d1, self.d2,
        ]
    }

    pub fn from_array(a: [f64; N_PARAMS]) -> Self {
        let [c0, c1, c2, c3, c4, c5, c6, c7, d0, d1, d2] = a;
        CpParams {
            c0,
            c1,
            c2,
            c3,
            c4,
            c5,
            c6,
            c7,
            d0,
            d1,
            d2,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }
}

impl Default for CpParams {
    fn default() -> Self {
        Self::CLASSIC
    }
}

/// γ = 1/(λ + d0·β + d1) − d2/(1 + β³).
pub fn gamma_term(lambda: f64, beta_deg: f64, d: [f64; 3]) -> Result<f64> {
    let first = lambda + d[0] * beta_deg + d[1];
    if !(first.abs() > POLE_EPS) {
        return Err(Error::SingularDenominator("λ + d0·β + d1"));
    }
    let second = 1.0 + beta_deg.powi(3);
    if !(second.abs() > POLE_EPS) {
        return Err(Error::SingularDenominator("1 + β³"));
    }
    Ok(1.0 / first - d[2] / second)
}

/// Evaluates the empirical Cp surface.
pub fn cp_empirical(lambda: f64, beta_deg: f64, p: &CpParams) -> Result<f64> {
    let gamma = gamma_term(lambda, beta_deg, [p.d0, p.d1, p.d2])?;
    let pitch_power = if p.c3 == 0.0 {
        0.0
    } else if beta_deg < 0.0 && p.c4.fract() != 0.0 {
        return Err(Error::Domain(format!("β^c4 with β = {beta_deg} < 0 and non-integer c4 = {}", p.c4)));
    } else if p.c4.fract() == 0.0 && p.c4.abs() < i32::MAX as f64 {
        p.c3 * beta_deg.powi(p.c4 as i32)
    } else {
        p.c3 * beta_deg.powf(p.c4)
    };
    let cp = p.c0 * (p.c1 * gamma - p.c2 * beta_deg - pitch_power - p.c5) * (-p.c6 * gamma).exp() + p.c7 * lambda;
    if cp.is_finite() {
        Ok(cp)
    } else {
        Err(Error::Domain(format!("Cp not finite at λ = {lambda}, β = {beta_deg}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub max_iter: usize,
    pub initial_damping: f64,
    /// Damping is multiplied by this on a rejected step and divided by it on
    /// an accepted one.
    pub damping_factor: f64,
    /// Stop once an accepted step lowers the residual by less than this
    /// fraction.
    pub rel_tolerance: f64,
    /// Extra fits from jittered starting points (±10 % per parameter).
    pub restarts: usize,
    pub seed: u64,
    /// Parameters held at their initial value, by name (`"c4"`, `"d1"`, ...).
    pub fixed: Vec<String>,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_iter: 200,
            initial_damping: 1e-3,
            damping_factor: 10.0,
            rel_tolerance: 1e-10,
            restarts: 0,
            seed: 0,
            fixed: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ZeroResidual,
    RelativeChange,
    /// No damping level produced a decrease; the point is a local minimum
    /// to working precision.
    DampingExhausted,
    MaxIterations,
    /// The finite-difference Jacobian left the model's domain; the last
    /// accepted point is returned.
    JacobianFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub converged: bool,
    pub stop_reason: StopReason,
    pub iterations: usize,
    /// Sum of squared Cp residuals after each accepted step, starting with
    /// the initial point.
    pub residual_history: Vec<f64>,
    pub sse: f64,
    pub cp_rmse: f64,
    pub n_records: usize,
    /// Fewer records than free parameters.
    pub underdetermined: bool,
    pub fixed: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: CpParams,
    /// Power-domain metrics in kW, fitted Cp converted through ½ρAv³.
    pub power_metrics: MetricsReport,
    pub diagnostics: FitDiagnostics,
}

/// One fitting sample: tip-speed ratio, pitch and measured Cp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpSample {
    pub lambda: f64,
    pub beta_deg: f64,
    pub cp: f64,
}

/// Fitting samples from the unflagged records above the wind-speed guard.
pub fn cp_samples(dataset: &Dataset, params: &TurbineParams) -> Result<Vec<CpSample>> {
    dataset
        .retained()
        .filter(|r| r.wind_speed_ms > V_MIN)
        .map(|r| {
            Ok(CpSample {
                lambda: turbine::tip_speed_ratio(r.rotor_speed_rads, r.wind_speed_ms, params)?,
                beta_deg: r.pitch_deg,
                cp: turbine::cp_from_power(r.power_w, r.wind_speed_ms, params)?,
            })
        })
        .collect()
}

/// Residual vector `cp_empirical(λ_i, β_i) − cp_i`.
pub fn residuals(samples: &[CpSample], p: &CpParams) -> Result<Vec<f64>> {
    samples
        .iter()
        .map(|s| cp_empirical(s.lambda, s.beta_deg, p).map(|c| c - s.cp))
        .collect()
}

fn fd_step(x: f64) -> f64 {
    6e-6 * x.abs().max(1.0)
}

/// Central-difference Jacobian of the residuals (rows = samples, columns =
/// the parameters in `free`), using steps `scale`·h_j.
pub fn jacobian(samples: &[CpSample], p: &CpParams, free: &[usize], scale: f64) -> Result<DMatrix<f64>> {
    let base = p.to_array();
    let mut jac = DMatrix::zeros(samples.len(), free.len());
    for (col, &j) in free.iter().enumerate() {
        let h = scale * fd_step(base[j]);
        let mut plus = base;
        let mut minus = base;
        plus[j] += h;
        minus[j] -= h;
        let (pp, pm) = (CpParams::from_array(plus), CpParams::from_array(minus));
        for (row, s) in samples.iter().enumerate() {
            let fp = cp_empirical(s.lambda, s.beta_deg, &pp)?;
            let fm = cp_empirical(s.lambda, s.beta_deg, &pm)?;
            jac[(row, col)] = (fp - fm) / (2.0 * h);
        }
    }
    Ok(jac)
}

fn sse(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

/// Fits the empirical model to the Cp of `dataset` by Levenberg–Marquardt.
///
/// Fails only when the starting point itself cannot be evaluated; running out
/// of iterations is reported through `diagnostics.converged`.
pub fn fit_least_squares(
    dataset: &Dataset,
    params: &TurbineParams,
    init: &CpParams,
    config: &FitConfig,
) -> Result<FitResult> {
    if !init.is_finite() {
        return Err(Error::FitFailed("initial parameters are not finite".into()));
    }
    let samples = cp_samples(dataset, params)?;
    if samples.is_empty() {
        return Err(Error::Empty("no usable records for the Cp fit"));
    }

    let mut notes = Vec::new();
    let mut fixed: Vec<String> = config.fixed.clone();
    for name in &fixed {
        if !PARAM_NAMES.contains(&name.as_str()) {
            return Err(Error::Config(format!("unknown Cp parameter `{name}`")));
        }
    }
    if samples.iter().any(|s| s.beta_deg < 0.0) && init.c4.fract() == 0.0 && !fixed.iter().any(|f| f == "c4") {
        fixed.push("c4".into());
        notes.push("negative pitch present: c4 held at its integer initial value".into());
    }
    let free: Vec<usize> = (0..N_PARAMS).filter(|&j| !fixed.iter().any(|f| f == PARAM_NAMES[j])).collect();

    let mut best = levenberg_marquardt(&samples, init, &free, config)?;
    if config.restarts > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        for _ in 0..config.restarts {
            let mut start = init.to_array();
            for &j in &free {
                start[j] *= 1.0 + rng.random_range(-0.1..0.1);
            }
            if let Ok(candidate) = levenberg_marquardt(&samples, &CpParams::from_array(start), &free, config) {
                if candidate.sse < best.sse {
                    best = candidate;
                }
            }
        }
    }
    match best.stop_reason {
        StopReason::MaxIterations => {
            log::warn!("Cp fit stopped after {} iterations without converging", best.iterations);
            notes.push("maximum iterations reached before convergence".into());
        }
        StopReason::JacobianFailed => notes.push("Jacobian left the model domain; best point so far returned".into()),
        _ => {}
    }

    let n = samples.len();
    let underdetermined = n < free.len();
    if underdetermined {
        notes.push(format!("{n} records for {} free parameters", free.len()));
    }

    let power_metrics = power_metrics(dataset, params, &best.params)?;

    Ok(FitResult {
        params: best.params,
        power_metrics,
        diagnostics: FitDiagnostics {
            converged: best.converged(),
            stop_reason: best.stop_reason,
            iterations: best.iterations,
            cp_rmse: (best.sse / n as f64).sqrt(),
            sse: best.sse,
            residual_history: best.history,
            n_records: n,
            underdetermined,
            fixed,
            notes,
        },
    })
}

/// Metrics (kW) of the power implied by an empirical Cp surface against the
/// measured power of the unflagged records.
pub fn power_metrics(dataset: &Dataset, params: &TurbineParams, cp: &CpParams) -> Result<MetricsReport> {
    let (pred_kw, meas_kw): (Vec<f64>, Vec<f64>) = dataset
        .retained()
        .filter(|r| r.wind_speed_ms > V_MIN)
        .map(|r| {
            let lambda = r.rotor_speed_rads * params.rotor_radius_m / r.wind_speed_ms;
            let cp = cp_empirical(lambda, r.pitch_deg, cp).unwrap_or(f64::NAN);
            (cp * params.wind_power(r.wind_speed_ms) / 1e3, r.power_w / 1e3)
        })
        .unzip();
    compute_metrics(&pred_kw, &meas_kw, None)
}

struct LmOutcome {
    params: CpParams,
    sse: f64,
    history: Vec<f64>,
    iterations: usize,
    stop_reason: StopReason,
}

impl LmOutcome {
    fn converged(&self) -> bool {
        !matches!(self.stop_reason, StopReason::MaxIterations | StopReason::JacobianFailed)
    }
}

fn levenberg_marquardt(samples: &[CpSample], init: &CpParams, free: &[usize], config: &FitConfig) -> Result<LmOutcome> {
    let mut p = *init;
    let mut r = residuals(samples, &p).map_err(|e| Error::FitFailed(format!("initial point: {e}")))?;
    let mut s = sse(&r);
    if !s.is_finite() {
        return Err(Error::FitFailed("initial residual is not finite".into()));
    }
    let mut history = vec![s];
    let mut damping = config.initial_damping;
    let mut iterations = 0;

    let stop_reason = loop {
        if s == 0.0 {
            break StopReason::ZeroResidual;
        }
        if iterations >= config.max_iter {
            break StopReason::MaxIterations;
        }
        iterations += 1;

        let jac = match jacobian(samples, &p, free, 1.0) {
            Ok(j) => j,
            Err(e) => {
                log::warn!("Cp fit: Jacobian not computable at iteration {iterations}: {e}");
                break StopReason::JacobianFailed;
            }
        };
        let jtj = jac.tr_mul(&jac);
        let grad = jac.tr_mul(&DVector::from_column_slice(&r));
        let diag_floor = 1e-12 * jtj.diagonal().max().max(f64::MIN_POSITIVE);

        let mut accepted = None;
        while damping < 1e16 {
            let mut lhs = jtj.clone();
            for k in 0..free.len() {
                lhs[(k, k)] += damping * jtj[(k, k)].max(diag_floor);
            }
            let rhs = -&grad;
            let step = match lhs.clone().cholesky() {
                Some(ch) => Some(ch.solve(&rhs)),
                None => lhs.lu().solve(&rhs),
            };
            if let Some(step) = step {
                let mut trial = p.to_array();
                for (k, &j) in free.iter().enumerate() {
                    trial[j] += step[k];
                }
                let trial = CpParams::from_array(trial);
                if let Ok(r_new) = residuals(samples, &trial) {
                    let s_new = sse(&r_new);
                    if s_new.is_finite() && s_new < s {
                        accepted = Some((trial, r_new, s_new));
                        damping = (damping / config.damping_factor).max(1e-15);
                        break;
                    }
                }
            }
            damping *= config.damping_factor;
        }

        let Some((trial, r_new, s_new)) = accepted else {
            break StopReason::DampingExhausted;
        };
        let rel = (s - s_new) / s;
        p = trial;
        r = r_new;
        s = s_new;
        history.push(s);
        if rel < config.rel_tolerance {
            break StopReason::RelativeChange;
        }
    };

    Ok(LmOutcome {
        params: p,
        sse: s,
        history,
        iterations,
        stop_reason,
    })
}
