//! Run configuration: a TOML file whose values command-line flags override.

use std::path::{Path, PathBuf};

use burnnet::data::phantom::{FULL_COLS, FULL_ROWS};
use burnnet::data::PhantomParams;
use burnnet::eval::TrustConfig;
use burnnet::model::{BurnNetConfig, Pairing, TaskMode};
use burnnet::texture::SvmParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataSource {
    /// Speckle phantoms generated from `data.phantom` and the run seed.
    #[default]
    Synthetic,
    /// Class-named PNG folders under `data.directory`.
    Directory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub source: DataSource,
    pub directory: Option<PathBuf>,
    /// Phantoms per class, unburned included.
    pub per_class: usize,
    /// Full-resolution phantom extents (depth, lateral).
    pub rows: usize,
    pub cols: usize,
    /// Block-averaging factor from full resolution to network input.
    pub downsample: usize,
    pub phantom: PhantomParams,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            source: DataSource::Synthetic,
            directory: None,
            per_class: 80,
            rows: FULL_ROWS,
            cols: FULL_COLS,
            downsample: 10,
            phantom: PhantomParams::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplainConfig {
    /// Classifier layer whose output Grad-CAM++ weighs; defaults to the
    /// last encoder layer.
    pub layer: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub task: TaskMode,
    pub folds: usize,
    pub output: PathBuf,
    /// Train the encoder-decoder and start every fold from its encoder.
    pub pretrain: bool,
    pub source_epochs: usize,
    pub pairing: Pairing,
    /// Train only the classifier head.
    pub frozen_encoder: bool,
    pub data: DataConfig,
    /// Network shape and classifier optimization. Its `seed` always follows
    /// the run seed.
    pub model: BurnNetConfig,
    pub trust: TrustConfig,
    pub svm: SvmParams,
    pub explain: ExplainConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            task: TaskMode::Binary,
            folds: 20,
            output: PathBuf::from("burnnet-run"),
            pretrain: true,
            source_epochs: 2000,
            pairing: Pairing::Unpaired,
            frozen_encoder: false,
            data: DataConfig::default(),
            model: BurnNetConfig::default(),
            trust: TrustConfig::default(),
            svm: SvmParams::default(),
            explain: ExplainConfig::default(),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl RunConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes to TOML")
    }

    /// Checks cross-field constraints and aligns the model seed and input
    /// extents with the data settings.
    pub fn finalize(mut self) -> Result<Self> {
        self.model.seed = self.seed;
        if self.folds < 2 {
            return Err(usage(format!("folds must be at least 2, got {}", self.folds)));
        }
        if self.data.downsample == 0 {
            return Err(usage("data.downsample must be positive"));
        }
        match self.data.source {
            DataSource::Synthetic => {
                if self.data.per_class == 0 {
                    return Err(usage("data.per_class must be positive"));
                }
                if self.data.rows == 0 || self.data.cols == 0 {
                    return Err(usage("phantom extents must be positive"));
                }
                self.data.phantom.validate()?;
                self.model.input_rows = self.data.rows.div_ceil(self.data.downsample);
                self.model.input_cols = self.data.cols.div_ceil(self.data.downsample);
            }
            DataSource::Directory => {
                let dir = self
                    .data
                    .directory
                    .as_ref()
                    .ok_or_else(|| usage("data.source = \"directory\" needs data.directory"))?;
                if !dir.is_dir() {
                    return Err(usage(format!("data directory {} does not exist", dir.display())));
                }
            }
        }
        self.model.validate()?;
        self.trust.validate()?;
        if !(self.svm.c > 0.0) || self.svm.gamma.is_some_and(|g| !(g > 0.0)) {
            return Err(usage("svm.c and svm.gamma must be positive"));
        }
        Ok(self)
    }

    /// SHA-256 of the effective configuration with the output path blanked,
    /// so identical runs into different directories share a hash.
    pub fn hash(&self) -> String {
        let canonical = RunConfig {
            output: PathBuf::new(),
            ..self.clone()
        };
        let digest = Sha256::digest(canonical.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
