use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evidential::{head_transform, nig_predict, NigPrediction};
use crate::preprocess::Scaler;
use crate::target::TargetKind;

/// Rows per forward chunk when predicting on large inputs.
const PREDICT_CHUNK: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
}

impl Activation {
    pub const ALL: [Activation; 2] = [Activation::Relu, Activation::Tanh];

    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative written in terms of the activation output.
    #[inline]
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            other => Err(Error::Config(format!("unknown activation `{other}`"))),
        }
    }
}

/// Output layer interpretation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Head {
    /// Output column 0 is the standardized target.
    #[default]
    Point,
    /// Four raw columns mapped to Normal-Inverse-Gamma parameters.
    Evidential,
}

/// Fully connected network with identity output.
///
/// `weights[l]` has shape (fan_in, fan_out) so a batch is propagated as
/// `x.dot(&w) + b` with one record per row.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub layer_sizes: Vec<usize>,
    pub activation: Activation,
    pub head: Head,
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub scaler: Scaler,
    pub target_kind: TargetKind,
    /// Weight of the physics residual the model was trained with, if any.
    pub physics_weight: Option<f64>,
    pub seed: u64,
}

/// Gradients with the same layout as the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl Gradients {
    pub fn zeros_like(model: &MlpModel) -> Self {
        Gradients {
            weights: model.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            biases: model.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|x| x.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|x| x.is_finite()))
    }
}

/// Hidden-layer outputs kept for the backward pass.
pub(crate) struct ForwardCache {
    hidden: Vec<Array2<f64>>,
    pub(crate) output: Array2<f64>,
}

impl MlpModel {
    /// Glorot-uniform weights, zero biases, point head.
    pub fn new(layer_sizes: &[usize], activation: Activation, seed: u64) -> Result<Self> {
        Self::with_head(layer_sizes, activation, Head::Point, seed)
    }

    pub fn with_head(layer_sizes: &[usize], activation: Activation, head: Head, seed: u64) -> Result<Self> {
        if layer_sizes.len() < 3 {
            return Err(Error::InvalidShape(format!(
                "need input, at least one hidden layer and output, got {layer_sizes:?}"
            )));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::InvalidShape(format!("zero-width layer in {layer_sizes:?}")));
        }
        if head == Head::Evidential && layer_sizes[layer_sizes.len() - 1] != 4 {
            return Err(Error::InvalidShape("evidential head needs output width 4".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::with_capacity(layer_sizes.len() - 1);
        let mut biases = Vec::with_capacity(layer_sizes.len() - 1);
        for pair in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            weights.push(Array2::from_shape_fn((fan_in, fan_out), |_| rng.random_range(-limit..limit)));
            biases.push(Array1::zeros(fan_out));
        }
        Ok(MlpModel {
            layer_sizes: layer_sizes.to_vec(),
            activation,
            head,
            weights,
            biases,
            scaler: Scaler::IDENTITY,
            target_kind: TargetKind::Power,
            physics_weight: None,
            seed,
        })
    }

    pub fn input_width(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_width(&self) -> usize {
        self.layer_sizes[self.layer_sizes.len() - 1]
    }

    pub fn n_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn parameter_count(&self) -> usize {
        self.layer_sizes.windows(2).map(|p| p[0] * p[1] + p[1]).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|x| x.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|x| x.is_finite()))
    }

    /// Output for one standardized input vector.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_width() {
            return Err(Error::LengthMismatch {
                left: input.len(),
                right: self.input_width(),
            });
        }
        if input.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("network input"));
        }
        let x = ArrayView2::from_shape((1, input.len()), input).expect("row shape");
        Ok(self.forward_batch(x).row(0).to_vec())
    }

    /// Outputs for a batch of standardized inputs, one record per row.
    pub fn forward_batch(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let last = self.n_layers() - 1;
        let mut a = x.dot(&self.weights[0]) + &self.biases[0];
        for l in 1..=last {
            let act = self.activation;
            a.mapv_inplace(|z| act.apply(z));
            a = a.dot(&self.weights[l]) + &self.biases[l];
        }
        a
    }

    pub(crate) fn forward_cached(&self, x: ArrayView2<f64>) -> ForwardCache {
        let last = self.n_layers() - 1;
        let mut hidden = Vec::with_capacity(last);
        let mut a = x.dot(&self.weights[0]) + &self.biases[0];
        for l in 1..=last {
            let act = self.activation;
            a.mapv_inplace(|z| act.apply(z));
            let next = a.dot(&self.weights[l]) + &self.biases[l];
            hidden.push(a);
            a = next;
        }
        ForwardCache { hidden, output: a }
    }

    /// Reverse-mode pass given dL/d(output).
    pub(crate) fn backward(&self, x: ArrayView2<f64>, cache: &ForwardCache, d_out: Array2<f64>) -> Gradients {
        let n_layers = self.n_layers();
        let mut gw = Vec::with_capacity(n_layers);
        let mut gb = Vec::with_capacity(n_layers);
        let mut delta = d_out;
        for l in (0..n_layers).rev() {
            let input = if l == 0 { x } else { cache.hidden[l - 1].view() };
            gw.push(input.t().dot(&delta));
            gb.push(delta.sum_axis(Axis(0)));
            if l > 0 {
                let mut prev = delta.dot(&self.weights[l].t());
                let act = self.activation;
                Zip::from(&mut prev)
                    .and(&cache.hidden[l - 1])
                    .for_each(|d, &a| *d *= act.derivative_from_output(a));
                delta = prev;
            }
        }
        gw.reverse();
        gb.reverse();
        Gradients {
            weights: gw,
            biases: gb,
        }
    }

    /// Standardizes physical (v, β, ω) rows with the model's input scaler.
    pub fn standardize_inputs(&self, rows: &[[f64; 3]]) -> Array2<f64> {
        let mut x = Array2::zeros((rows.len(), 3));
        for (mut row, r) in x.rows_mut().into_iter().zip(rows) {
            let z = self.scaler.apply_inputs(*r);
            row[0] = z[0];
            row[1] = z[1];
            row[2] = z[2];
        }
        x
    }

    /// Raw network outputs for physical inputs.
    pub fn predict_raw(&self, rows: &[[f64; 3]]) -> Result<Array2<f64>> {
        if self.input_width() != 3 {
            return Err(Error::InvalidShape(format!(
                "operating-point prediction needs input width 3, model has {}",
                self.input_width()
            )));
        }
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("operating point"));
        }
        let mut out = Array2::zeros((rows.len(), self.output_width()));
        for (i, chunk) in rows.chunks(PREDICT_CHUNK).enumerate() {
            let x = self.standardize_inputs(chunk);
            let y = self.forward_batch(x.view());
            let start = i * PREDICT_CHUNK;
            out.slice_mut(ndarray::s![start..start + chunk.len(), ..]).assign(&y);
        }
        Ok(out)
    }

    /// Predicted target in physical units (the NIG mean for evidential heads).
    pub fn predict_target(&self, rows: &[[f64; 3]]) -> Result<Vec<f64>> {
        let raw = self.predict_raw(rows)?;
        Ok(raw.column(0).iter().map(|&z| self.scaler.target.invert(z)).collect())
    }

    /// NIG moments in physical target units.
    pub fn predict_nig(&self, rows: &[[f64; 3]]) -> Result<Vec<NigPrediction>> {
        if self.head != Head::Evidential {
            return Err(Error::Config("model has no evidential head".into()));
        }
        let raw = self.predict_raw(rows)?;
        raw.rows()
            .into_iter()
            .map(|r| {
                let p = head_transform([r[0], r[1], r[2], r[3]]);
                Ok(nig_predict(&p)?.unstandardize(&self.scaler.target))
            })
            .collect()
    }
}
