use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::empirical::{CpParams, FitConfig};
use crate::error::{Error, Result};
use crate::ingest::ColumnMap;
use crate::nn::{Activation, Architecture, LossKind};
use crate::pinn::PinnConfig;
use crate::preprocess::{PreprocessConfig, SplitMode};
use crate::target::TargetKind;
use crate::turbine::TurbineParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Paths {
    pub raw_data: Option<PathBuf>,
    pub workspace: PathBuf,
    /// Optional (v, P) manufacturer curve, P in W.
    pub manufacturer_curve: Option<PathBuf>,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            raw_data: None,
            workspace: PathBuf::from("workspace"),
            manufacturer_curve: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub mode: SplitMode,
    /// Fraction of the training split held out for the plateau scheduler.
    /// Zero schedules on the test split.
    pub validation_fraction: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            train_fraction: 0.8,
            mode: SplitMode::Random,
            validation_fraction: 0.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmpiricalConfig {
    pub init: CpParams,
    pub fit: FitConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Nn,
    Pinn,
}

/// Model section of the run file. Unset values take the defaults of the
/// chosen variant and target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSection {
    pub target: TargetKind,
    pub variant: Variant,
    pub evidential: bool,
    pub physics_weight: Option<f64>,
    pub lambda_evi: Option<f64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub n_layers: Option<usize>,
    pub n_neurons: Option<usize>,
    pub activation: Option<Activation>,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            target: TargetKind::Power,
            variant: Variant::Nn,
            evidential: false,
            physics_weight: None,
            lambda_evi: None,
            epochs: None,
            batch_size: None,
            learning_rate: None,
            n_layers: None,
            n_neurons: None,
            activation: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PowerCurveConfig {
    pub bin_width_ms: f64,
    /// Half-width of the band in standard deviations.
    pub band_sigmas: f64,
}

impl Default for PowerCurveConfig {
    fn default() -> Self {
        PowerCurveConfig {
            bin_width_ms: 0.5,
            band_sigmas: 3.0,
        }
    }
}

/// Everything a run needs besides the raw data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub paths: Paths,
    pub columns: ColumnMap,
    pub turbine: TurbineParams,
    pub preprocess: PreprocessConfig,
    pub split: SplitConfig,
    pub empirical: EmpiricalConfig,
    pub model: ModelSection,
    pub power_curve: PowerCurveConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            paths: Paths::default(),
            columns: ColumnMap::canonical(),
            turbine: TurbineParams::MM82,
            preprocess: PreprocessConfig::default(),
            split: SplitConfig::default(),
            empirical: EmpiricalConfig::default(),
            model: ModelSection::default(),
            power_curve: PowerCurveConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.turbine.validate()?;
        Ok(cfg)
    }

    /// Reads a run file; relative paths inside it resolve against the
    /// file's directory.
    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let Some(base) = path.parent() {
            cfg.paths.rebase(base);
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn workspace_file(&self, name: &str) -> PathBuf {
        self.paths.workspace.join(name)
    }

    /// Training configuration implied by the model section.
    pub fn pinn_config(&self) -> Result<PinnConfig> {
        let m = &self.model;
        let mut cfg = match (m.variant, m.evidential) {
            (Variant::Nn, false) => PinnConfig::plain(m.target),
            (Variant::Nn, true) => PinnConfig::evidential(m.target),
            (Variant::Pinn, evidential) => {
                let mut c = PinnConfig::new(m.target);
                if evidential {
                    c.train.loss_kind = LossKind::Evidential;
                }
                c
            }
        };
        if let Some(w) = m.physics_weight {
            if m.variant == Variant::Nn && w != 0.0 {
                return Err(Error::Config("physics_weight needs variant = \"pinn\"".into()));
            }
            cfg.physics_weight = w;
        }
        if let Some(l) = m.lambda_evi {
            cfg.train.lambda_evi = l;
        }
        if let Some(e) = m.epochs {
            cfg.train.epochs = e;
        }
        if let Some(b) = m.batch_size {
            cfg.train.batch_size = b;
        }
        if let Some(lr) = m.learning_rate {
            cfg.train.learning_rate = lr;
        }
        let default_arch = Architecture::default_for(m.target);
        cfg.architecture = Architecture {
            n_layers: m.n_layers.unwrap_or(default_arch.n_layers),
            n_neurons: m.n_neurons.unwrap_or(default_arch.n_neurons),
            activation: m.activation.unwrap_or(default_arch.activation),
        };
        cfg.train.seed = self.seed;
        Ok(cfg)
    }
}

impl Paths {
    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.workspace);
        if let Some(p) = self.raw_data.as_mut() {
            fix(p);
        }
        if let Some(p) = self.manufacturer_curve.as_mut() {
            fix(p);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::from_toml_str("").unwrap(), RunConfig::default());
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.model.variant = Variant::Pinn;
        cfg.model.target = TargetKind::Cp;
        cfg.model.epochs = Some(3);
        cfg.paths.raw_data = Some("raw.csv".into());
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn model_section_overrides() {
        let cfg = RunConfig::from_toml_str(
            "seed = 3\n[model]\ntarget = \"torque\"\nvariant = \"pinn\"\nphysics_weight = 0.5\nn_neurons = 16\n",
        )
        .unwrap();
        let p = cfg.pinn_config().unwrap();
        assert_eq!(p.physics_weight, 0.5);
        assert_eq!(p.architecture.n_neurons, 16);
        assert_eq!(p.train.epochs, 200);
        assert_eq!(p.train.seed, 3);
        assert!(RunConfig::from_toml_str("[model]\nphysics_weight = 1.0\n")
            .unwrap()
            .pinn_config()
            .is_err());
        assert!(RunConfig::from_toml_str("[model]\ntarget = \"speed\"\n").is_err());
    }
}
