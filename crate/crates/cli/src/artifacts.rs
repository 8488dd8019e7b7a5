//! Artifact writers. Every artifact records the config hash, seed and tool
//! version, and none records wall-clock time, so reruns are byte-identical.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use burnnet::nn::Checkpoint;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub fn version() -> String {
    format!("burnnet-v{}", env!("CARGO_PKG_VERSION"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

impl Meta {
    pub fn new(config_hash: String, seed: u64) -> Self {
        Meta { config_hash, seed, version: version() }
    }

    fn line(&self, schema: &str) -> String {
        format!(
            "# schema={schema} config_hash={} seed={} version={}",
            self.config_hash, self.seed, self.version
        )
    }
}

/// JSON document layout: schema tag, metadata, then the body's fields.
#[derive(Debug, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub schema: String,
    pub meta: Meta,
    #[serde(flatten)]
    pub body: T,
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    ensure_parent(path)?;
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, schema: &str, meta: &Meta, body: &T) -> Result<()> {
    let env = Envelope { schema: schema.to_string(), meta: meta.clone(), body };
    let mut text = serde_json::to_string_pretty(&env).map_err(|e| CliError::Artifact {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<T: DeserializeOwned>(path: &Path, producer: &'static str) -> Result<Envelope<T>> {
    let text = read_artifact(path, producer)?;
    serde_json::from_str(&text).map_err(|e| CliError::Artifact {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// CSV preceded by a `# schema=... config_hash=...` comment line.
pub fn write_csv(path: &Path, schema: &str, meta: &Meta, body: &str) -> Result<()> {
    write_text(path, &format!("{}\n{body}", meta.line(schema)))
}

fn read_artifact(path: &Path, producer: &'static str) -> Result<String> {
    if !path.exists() {
        return Err(CliError::MissingArtifact { path: path.to_path_buf(), producer });
    }
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// 8-bit grayscale PNG of values in [0, 1] with the metadata in tEXt chunks.
pub fn write_png(path: &Path, rows: usize, cols: usize, values: &[f64], meta: &Meta) -> Result<()> {
    ensure_parent(path)?;
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let png_err = |e: png::EncodingError| CliError::Artifact { path: path.to_path_buf(), message: e.to_string() };
    let mut enc = png::Encoder::new(BufWriter::new(file), cols as u32, rows as u32);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Eight);
    for (k, v) in [
        ("config_hash", meta.config_hash.clone()),
        ("seed", meta.seed.to_string()),
        ("version", meta.version.clone()),
    ] {
        enc.add_text_chunk(k.to_string(), v).map_err(png_err)?;
    }
    let bytes: Vec<u8> = values.iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect();
    let mut w = enc.write_header().map_err(png_err)?;
    w.write_image_data(&bytes).map_err(png_err)?;
    w.finish().map_err(png_err)
}

/// Saves with the run metadata appended to the checkpoint's own.
pub fn save_checkpoint(path: &Path, mut ckpt: Checkpoint, meta: &Meta) -> Result<()> {
    ensure_parent(path)?;
    ckpt.metadata.extend([
        ("config_hash".to_string(), meta.config_hash.clone()),
        ("run_seed".to_string(), meta.seed.to_string()),
        ("version".to_string(), meta.version.clone()),
    ]);
    Ok(ckpt.save(path)?)
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    if !path.exists() {
        return Err(CliError::MissingArtifact { path: path.to_path_buf(), producer: "train" });
    }
    Ok(Checkpoint::load(path)?)
}

/// File locations inside a run directory.
#[derive(Debug, Clone)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Layout { root: root.into() }
    }

    pub fn effective_config(&self) -> PathBuf {
        self.root.join("effective_config.toml")
    }

    pub fn data_dir(&self) -> PathBuf {
        self.root.join("data")
    }

    pub fn source_dir(&self) -> PathBuf {
        self.root.join("source")
    }

    pub fn source_checkpoint(&self) -> PathBuf {
        self.source_dir().join("source.bnck")
    }

    pub fn folds_file(&self) -> PathBuf {
        self.root.join("folds.json")
    }

    pub fn fold_dir(&self, fold: usize) -> PathBuf {
        self.root.join("folds").join(format!("fold_{fold:02}"))
    }

    pub fn fold_checkpoint(&self, fold: usize) -> PathBuf {
        self.fold_dir(fold).join("classifier.bnck")
    }

    pub fn evaluation_dir(&self) -> PathBuf {
        self.root.join("evaluation")
    }

    pub fn predictions_file(&self) -> PathBuf {
        self.evaluation_dir().join("predictions.json")
    }

    pub fn baseline_dir(&self) -> PathBuf {
        self.root.join("baseline")
    }

    pub fn trust_dir(&self) -> PathBuf {
        self.root.join("trust")
    }

    pub fn explain_dir(&self) -> PathBuf {
        self.root.join("explain")
    }
}
