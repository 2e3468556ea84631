//! Physics-informed training for the three target kinds and the shared
//! pathway from any target to electrical power.
//!
//! The physics residual compares the network output against the target
//! implied by the other measured channels: g·T·ω for power,
//! 2g·T·ω/(ρAv³) for Cp and P/(g·ω) for torque. Both residual targets are
//! standardized with the same target scaler.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evidential::DEFAULT_LAMBDA;
use crate::metrics::{compute_metrics, MetricsReport};
use crate::nn::{
    evaluate_loss, train, Architecture, Head, History, LossKind, MlpModel, Objective, Samples, TrainConfig,
};
use crate::preprocess::{fit_scaler, Scaler};
use crate::record::Dataset;
use crate::target::TargetKind;
use crate::turbine::TurbineParams;

/// One trainable variant: target kind, physics weight, head and schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinnConfig {
    pub target_kind: TargetKind,
    /// Zero trains the plain network.
    pub physics_weight: f64,
    pub architecture: Architecture,
    pub train: TrainConfig,
}

impl PinnConfig {
    /// Physics-informed defaults: unit physics weight, 200 epochs.
    pub fn new(target_kind: TargetKind) -> Self {
        PinnConfig {
            target_kind,
            physics_weight: 1.0,
            architecture: Architecture::default_for(target_kind),
            train: TrainConfig {
                epochs: 200,
                ..TrainConfig::default()
            },
        }
    }

    /// Data-only network: no physics term, 150 epochs.
    pub fn plain(target_kind: TargetKind) -> Self {
        PinnConfig {
            physics_weight: 0.0,
            train: TrainConfig {
                epochs: 150,
                ..TrainConfig::default()
            },
            ..PinnConfig::new(target_kind)
        }
    }

    /// Plain network with a Normal-Inverse-Gamma head.
    pub fn evidential(target_kind: TargetKind) -> Self {
        let mut cfg = PinnConfig::plain(target_kind);
        cfg.train.loss_kind = LossKind::Evidential;
        cfg.train.lambda_evi = DEFAULT_LAMBDA;
        cfg
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.train.seed = seed;
        self
    }

    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.train.epochs = epochs;
        self
    }

    pub fn head(&self) -> Head {
        match self.train.loss_kind {
            LossKind::Mae => Head::Point,
            LossKind::Evidential => Head::Evidential,
        }
    }

    pub fn is_pinn(&self) -> bool {
        self.physics_weight != 0.0
    }

    fn validate(&self) -> Result<()> {
        if !(self.physics_weight >= 0.0 && self.physics_weight.is_finite()) {
            return Err(Error::Config(format!("physics weight {} must be non-negative", self.physics_weight)));
        }
        if self.architecture.n_layers == 0 || self.architecture.n_neurons == 0 {
            return Err(Error::Config("architecture needs at least one non-empty hidden layer".into()));
        }
        Ok(())
    }
}

/// Standardized inputs, data targets and (optionally) physics targets for
/// the unflagged records of `dataset`.
pub fn prepare_samples(
    dataset: &Dataset,
    scaler: &Scaler,
    kind: TargetKind,
    params: &TurbineParams,
    with_physics: bool,
) -> Result<Samples> {
    let n = dataset.retained_count();
    if n == 0 {
        return Err(Error::Empty("no unflagged records"));
    }
    let mut inputs = Array2::zeros((n, 3));
    let mut targets = Array1::zeros(n);
    let mut physics = with_physics.then(|| Array1::zeros(n));
    for (i, r) in dataset.retained().enumerate() {
        let z = scaler.apply_inputs(r.inputs());
        inputs[[i, 0]] = z[0];
        inputs[[i, 1]] = z[1];
        inputs[[i, 2]] = z[2];
        targets[i] = scaler.target.apply(kind.data_target(r, params)?);
        if let Some(ph) = physics.as_mut() {
            ph[i] = scaler.target.apply(kind.physics_target(r, params)?);
        }
    }
    if inputs.iter().chain(targets.iter()).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("training sample"));
    }
    Samples::new(inputs, targets, physics)
}

/// Model and training history.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub model: MlpModel,
    pub history: History,
}

/// Fits the scaler on `train_set`, builds the network and trains it with
/// L = L_data + physics_weight·L_phys, monitoring `val_set`.
pub fn train_pinn(
    config: &PinnConfig,
    train_set: &Dataset,
    val_set: &Dataset,
    params: &TurbineParams,
) -> Result<TrainedModel> {
    config.validate()?;
    params.validate()?;
    let kind = config.target_kind;
    let scaler = fit_scaler(train_set, kind, params)?;

    let physics_needed = config.is_pinn();
    let build = |ds: &Dataset| -> Result<Samples> {
        match prepare_samples(ds, &scaler, kind, params, true) {
            Ok(s) => Ok(s),
            // a plain network only reports the physics residual, so records
            // without a defined physics target just drop that report
            Err(_) if !physics_needed => prepare_samples(ds, &scaler, kind, params, false),
            Err(e) => Err(e),
        }
    };
    let train_samples = build(train_set)?;
    let val_samples = build(val_set)?;

    let head = config.head();
    let width = if head == Head::Evidential { 4 } else { 1 };
    let mut model = MlpModel::with_head(
        &config.architecture.layer_sizes(width),
        config.architecture.activation,
        head,
        config.train.seed,
    )?;
    model.scaler = scaler;
    model.target_kind = kind;
    model.physics_weight = physics_needed.then_some(config.physics_weight);

    let history = train(
        &mut model,
        &train_samples,
        &val_samples,
        &config.train,
        Some(config.physics_weight),
    )?;
    Ok(TrainedModel { model, history })
}

/// (L_data, L_phys) of `model` on the unflagged records of `dataset`, both
/// as standardized mean absolute deviations.
pub fn pinn_residuals(model: &MlpModel, dataset: &Dataset, params: &TurbineParams) -> Result<(f64, f64)> {
    let samples = prepare_samples(dataset, &model.scaler, model.target_kind, params, true)?;
    let parts = evaluate_loss(model, &samples, &Objective::MAE.with_head(model.head))?;
    Ok((parts.mae, parts.phys.expect("physics targets prepared")))
}

fn residuals_for(kind: TargetKind, model: &MlpModel, dataset: &Dataset, params: &TurbineParams) -> Result<(f64, f64)> {
    if model.target_kind != kind {
        return Err(Error::Config(format!(
            "model regresses {} but {kind} residuals were requested",
            model.target_kind
        )));
    }
    pinn_residuals(model, dataset, params)
}

/// Residuals against P and g·T·ω.
pub fn pinn_residuals_power(model: &MlpModel, dataset: &Dataset, params: &TurbineParams) -> Result<(f64, f64)> {
    residuals_for(TargetKind::Power, model, dataset, params)
}

/// Residuals against Cp from P and 2g·T·ω/(ρAv³).
pub fn pinn_residuals_cp(model: &MlpModel, dataset: &Dataset, params: &TurbineParams) -> Result<(f64, f64)> {
    residuals_for(TargetKind::Cp, model, dataset, params)
}

/// Residuals against T and P/(g·ω).
pub fn pinn_residuals_torque(model: &MlpModel, dataset: &Dataset, params: &TurbineParams) -> Result<(f64, f64)> {
    residuals_for(TargetKind::Torque, model, dataset, params)
}

/// Electrical power (W) predicted at physical operating points (v, β, ω).
pub fn predict_power(model: &MlpModel, points: &[[f64; 3]], params: &TurbineParams) -> Result<Vec<f64>> {
    let values = model.predict_target(points)?;
    Ok(values
        .iter()
        .zip(points)
        .map(|(&y, p)| model.target_kind.to_power(y, p[0], p[2], params))
        .collect())
}

/// Power prediction with the epistemic standard deviation propagated to
/// watts when the model has an evidential head.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerPrediction {
    pub power_w: f64,
    pub sigma_w: Option<f64>,
}

pub fn predict_power_with_uncertainty(
    model: &MlpModel,
    points: &[[f64; 3]],
    params: &TurbineParams,
) -> Result<Vec<PowerPrediction>> {
    if model.head != Head::Evidential {
        return Ok(predict_power(model, points, params)?
            .into_iter()
            .map(|power_w| PowerPrediction { power_w, sigma_w: None })
            .collect());
    }
    let nig = model.predict_nig(points)?;
    Ok(nig
        .iter()
        .zip(points)
        .map(|(m, p)| {
            let factor = model.target_kind.power_factor(p[0], p[2], params);
            PowerPrediction {
                power_w: m.mean * factor,
                sigma_w: Some(m.epistemic_std() * factor.abs()),
            }
        })
        .collect())
}

/// Metrics (kW) of predicted power against measured power ("data") and
/// against g·T·ω ("phys").
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub data: MetricsReport,
    pub phys: MetricsReport,
    pub predicted_power_w: Vec<f64>,
    pub sigma_power_w: Option<Vec<f64>>,
}

pub fn evaluate(model: &MlpModel, dataset: &Dataset, params: &TurbineParams) -> Result<Evaluation> {
    let records: Vec<_> = dataset.retained().collect();
    if records.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    let points: Vec<[f64; 3]> = records.iter().map(|r| r.inputs()).collect();
    let preds = predict_power_with_uncertainty(model, &points, params)?;
    let kw = |x: f64| x / 1e3;
    let pred_kw: Vec<f64> = preds.iter().map(|p| kw(p.power_w)).collect();
    let data_kw: Vec<f64> = records.iter().map(|r| kw(r.power_w)).collect();
    let phys_kw: Vec<f64> = records
        .iter()
        .map(|r| kw(params.gear_ratio * r.torque_nm * r.rotor_speed_rads))
        .collect();
    let sigma_w: Option<Vec<f64>> = preds.iter().map(|p| p.sigma_w).collect();
    let sigma_kw: Option<Vec<f64>> = sigma_w.as_ref().map(|s| s.iter().map(|&x| kw(x)).collect());
    Ok(Evaluation {
        data: compute_metrics(&pred_kw, &data_kw, sigma_kw.as_deref())?,
        phys: compute_metrics(&pred_kw, &phys_kw, sigma_kw.as_deref())?,
        predicted_power_w: preds.iter().map(|p| p.power_w).collect(),
        sigma_power_w: sigma_w,
    })
}
