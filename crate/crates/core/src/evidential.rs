//! Normal-Inverse-Gamma evidential output head.
//!
//! The network emits four raw values per input which are mapped to NIG
//! parameters (γ, ν, α, β). Here β is the inverse-gamma scale, unrelated to
//! the blade pitch angle. The prediction is γ, the epistemic variance
//! β/(ν(α−1)) and the aleatoric variance β/(α−1).
//!
//! Training minimizes the negative log-likelihood of the Student-t marginal
//! plus `lambda`·|y − γ|·(2ν + α), which penalizes evidence spent on errors.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{Error, Result};
use crate::preprocess::Standardization;
use crate::target::TargetKind;
use crate::turbine::TurbineParams;

/// Lower guard added to ν, α−1 and β.
pub const NIG_EPS: f64 = 1e-6;
/// Default weight of the evidence regularizer.
pub const DEFAULT_LAMBDA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NigParams {
    pub gamma_loc: f64,
    pub nu: f64,
    pub alpha: f64,
    pub beta_scale: f64,
}

impl NigParams {
    pub fn is_valid(&self) -> bool {
        self.gamma_loc.is_finite()
            && self.nu > 0.0
            && self.beta_scale > 0.0
            && self.alpha > 1.0
            && self.nu.is_finite()
            && self.alpha.is_finite()
            && self.beta_scale.is_finite()
    }
}

/// Moments of an NIG posterior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NigPrediction {
    pub mean: f64,
    pub epistemic_var: f64,
    pub aleatoric_var: f64,
}

impl NigPrediction {
    pub fn epistemic_std(&self) -> f64 {
        self.epistemic_var.sqrt()
    }

    pub fn aleatoric_std(&self) -> f64 {
        self.aleatoric_var.sqrt()
    }

    /// Maps moments from standardized to physical target units.
    pub fn unstandardize(&self, scale: &Standardization) -> NigPrediction {
        let s2 = scale.std * scale.std;
        NigPrediction {
            mean: scale.invert(self.mean),
            epistemic_var: self.epistemic_var * s2,
            aleatoric_var: self.aleatoric_var * s2,
        }
    }
}

#[inline]
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// γ = raw₀, ν = softplus(raw₁)+ε, α = 1+softplus(raw₂)+ε, β = softplus(raw₃)+ε.
pub fn head_transform(raw: [f64; 4]) -> NigParams {
    NigParams {
        gamma_loc: raw[0],
        nu: softplus(raw[1]) + NIG_EPS,
        alpha: 1.0 + softplus(raw[2]) + NIG_EPS,
        beta_scale: softplus(raw[3]) + NIG_EPS,
    }
}

pub fn nig_predict(p: &NigParams) -> Result<NigPrediction> {
    if !(p.alpha > 1.0 && p.nu > 0.0) {
        return Err(Error::Domain(format!("NIG parameters out of range: {p:?}")));
    }
    Ok(NigPrediction {
        mean: p.gamma_loc,
        epistemic_var: p.beta_scale / (p.nu * (p.alpha - 1.0)),
        aleatoric_var: p.beta_scale / (p.alpha - 1.0),
    })
}

/// Negative log-likelihood of `y` under the Student-t marginal of the NIG:
/// ½log(π/ν) − α·log Ω + (α+½)·log((y−γ)²ν + Ω) + logΓ(α) − logΓ(α+½),
/// with Ω = 2β(1+ν).
pub fn nig_nll(y: f64, p: &NigParams) -> f64 {
    let omega = 2.0 * p.beta_scale * (1.0 + p.nu);
    let r = y - p.gamma_loc;
    0.5 * (std::f64::consts::PI / p.nu).ln() - p.alpha * omega.ln()
        + (p.alpha + 0.5) * (r * r * p.nu + omega).ln()
        + ln_gamma(p.alpha)
        - ln_gamma(p.alpha + 0.5)
}

/// Evidence regularizer |y − γ|·(2ν + α).
pub fn nig_regularizer(y: f64, p: &NigParams) -> f64 {
    (y - p.gamma_loc).abs() * (2.0 * p.nu + p.alpha)
}

/// Per-sample loss pieces and the gradient of `nll + lambda·reg` with
/// respect to the four raw head outputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvidentialTerms {
    pub nll: f64,
    pub reg: f64,
    pub grad_raw: [f64; 4],
}

pub fn evidential_terms(raw: [f64; 4], y: f64, lambda: f64) -> EvidentialTerms {
    let p = head_transform(raw);
    let (gamma, nu, alpha, beta) = (p.gamma_loc, p.nu, p.alpha, p.beta_scale);
    let omega = 2.0 * beta * (1.0 + nu);
    let r = y - gamma;
    let denom = nu * r * r + omega;
    let a_half = alpha + 0.5;

    let d_gamma = -a_half * 2.0 * nu * r / denom;
    let d_nu = -0.5 / nu - alpha * 2.0 * beta / omega + a_half * (r * r + 2.0 * beta) / denom;
    let d_alpha = -omega.ln() + denom.ln() + digamma(alpha) - digamma(a_half);
    let d_beta = -alpha / beta + a_half * 2.0 * (1.0 + nu) / denom;

    // subgradient of |r| taken as 0 at r = 0
    let sign = if r > 0.0 {
        1.0
    } else if r < 0.0 {
        -1.0
    } else {
        0.0
    };
    let abs_r = r.abs();
    let reg = abs_r * (2.0 * nu + alpha);
    let g_gamma = d_gamma - lambda * sign * (2.0 * nu + alpha);
    let g_nu = d_nu + lambda * 2.0 * abs_r;
    let g_alpha = d_alpha + lambda * abs_r;

    EvidentialTerms {
        nll: nig_nll(y, &p),
        reg,
        grad_raw: [
            g_gamma,
            g_nu * sigmoid(raw[1]),
            g_alpha * sigmoid(raw[2]),
            d_beta * sigmoid(raw[3]),
        ],
    }
}

/// Mean of `nll + lambda·reg` over a batch of raw head outputs.
pub fn evidential_loss(raw: &[[f64; 4]], targets: &[f64], lambda: f64) -> Result<f64> {
    if raw.len() != targets.len() {
        return Err(Error::LengthMismatch {
            left: raw.len(),
            right: targets.len(),
        });
    }
    if raw.is_empty() {
        return Err(Error::Empty("evidential batch"));
    }
    let mut total = 0.0;
    for (i, (r, &y)) in raw.iter().zip(targets).enumerate() {
        let p = head_transform(*r);
        let l = nig_nll(y, &p) + lambda * nig_regularizer(y, &p);
        if !l.is_finite() {
            return Err(Error::NonFiniteLoss { start: i, end: i + 1 });
        }
        total += l;
    }
    Ok(total / raw.len() as f64)
}

/// Propagates a standard deviation in physical target units to watts.
/// Every target-to-power map is linear at a fixed operating point, so the
/// propagation is exact.
pub fn uncertainty_to_power(
    sigma_target: f64,
    wind_speed_ms: f64,
    rotor_speed_rads: f64,
    target_kind: TargetKind,
    params: &TurbineParams,
) -> f64 {
    sigma_target * target_kind.power_factor(wind_speed_ms, rotor_speed_rads, params).abs()
}

/// Mean absolute error and uncertainty within one power decile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecileRow {
    pub power_lo: f64,
    pub power_hi: f64,
    pub power_mean: f64,
    pub mean_abs_error: f64,
    pub mean_sigma: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    /// Fraction of targets within 1σ, 2σ and 3σ of the prediction.
    pub coverage: [f64; 3],
    pub mau: f64,
    pub mae: f64,
    pub mau_over_mae: Option<f64>,
    pub by_decile: Vec<DecileRow>,
    pub n: usize,
}

pub fn calibration_report(predictions: &[f64], sigmas: &[f64], targets: &[f64]) -> Result<CalibrationReport> {
    let n = targets.len();
    for len in [predictions.len(), sigmas.len()] {
        if len != n {
            return Err(Error::LengthMismatch { left: len, right: n });
        }
    }
    if n == 0 {
        return Err(Error::Empty("calibration input"));
    }
    let errors: Vec<f64> = predictions.iter().zip(targets).map(|(p, t)| (t - p).abs()).collect();
    let mut coverage = [0.0; 3];
    for (k, c) in coverage.iter_mut().enumerate() {
        let width = (k + 1) as f64;
        let inside = errors.iter().zip(sigmas).filter(|(e, s)| **e <= width * **s).count();
        *c = inside as f64 / n as f64;
    }
    let mae = errors.iter().sum::<f64>() / n as f64;
    let mau = sigmas.iter().sum::<f64>() / n as f64;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| targets[a].total_cmp(&targets[b]));
    let groups = n.min(10);
    let by_decile = (0..groups)
        .map(|g| {
            let idx = &order[g * n / groups..(g + 1) * n / groups];
            let m = idx.len() as f64;
            DecileRow {
                power_lo: targets[idx[0]],
                power_hi: targets[idx[idx.len() - 1]],
                power_mean: idx.iter().map(|&i| targets[i]).sum::<f64>() / m,
                mean_abs_error: idx.iter().map(|&i| errors[i]).sum::<f64>() / m,
                mean_sigma: idx.iter().map(|&i| sigmas[i]).sum::<f64>() / m,
                n: idx.len(),
            }
        })
        .collect();

    Ok(CalibrationReport {
        coverage,
        mau,
        mae,
        mau_over_mae: (mae > 0.0).then(|| mau / mae),
        by_decile,
        n,
    })
}
