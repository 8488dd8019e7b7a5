//! The two-stage network: a source encoder-decoder and a target classifier
//! that reuses its encoder.
//!
//! Encoder, for an `R x C` input:
//!
//! ```text
//! 4 x [conv 2x2 s1 -> ReLU -> avgpool 2x2 s1]     spatial -2 per block
//! conv 1x1 (bottleneck) -> ReLU                   (R-8) x (C-8)
//! ```
//!
//! Decoder:
//!
//! ```text
//! 4 x [deconv 2x2 s2 -> ReLU -> conv 2x2 s2 -> ReLU]   spatial-preserving pairs
//! deconv 2x2 s2 -> ReLU                                2(R-8) x 2(C-8)
//! center crop to R x C -> conv 1x1 to one channel -> sigmoid
//! ```
//!
//! Classifier head: global average pooling then one dense layer producing
//! logits (one for the binary task, four for the multiclass task).

mod train;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{BurnClass, UltrasoundImage};
use crate::error::{Error, Result};
use crate::nn::layers::{sigmoid_scalar, softmax};
use crate::nn::{AvgPool2d, CenterCrop, Checkpoint, Conv2d, Deconv2d, Dense, Layer, Sequential};
use crate::rng::Rng;
use crate::tensor::Tensor;

pub use train::{accuracy, train_classifier, train_source, LossTrace, Pairing};

/// Smallest input extent the encoder accepts.
pub const MIN_CLASSIFIER_EXTENT: usize = 10;
/// Smallest input extent for which the decoder's final deconvolution is at
/// least as large as the input, so the crop is well defined.
pub const MIN_SOURCE_EXTENT: usize = 16;

const TAG_ENCODER: u64 = 0x454e_4300;
const TAG_DECODER: u64 = 0x4445_4300;
const TAG_HEAD: u64 = 0x4845_4400;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BurnNetConfig {
    /// Depth extent of the network input.
    pub input_rows: usize,
    /// Lateral extent of the network input.
    pub input_cols: usize,
    pub encoder_channels: [usize; 4],
    pub bottleneck_channels: usize,
    pub decoder_channels: [usize; 4],
    pub epochs: usize,
    pub batch: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for BurnNetConfig {
    fn default() -> Self {
        BurnNetConfig {
            input_rows: 22,
            input_cols: 34,
            encoder_channels: [16, 32, 64, 128],
            bottleneck_channels: 64,
            decoder_channels: [128, 64, 32, 16],
            epochs: 2000,
            batch: 32,
            learning_rate: 0.001,
            seed: 0,
        }
    }
}

impl BurnNetConfig {
    /// Checks everything except the input extents, which depend on the stage.
    pub fn validate(&self) -> Result<()> {
        let widths = self
            .encoder_channels
            .iter()
            .chain(&self.decoder_channels)
            .chain(std::iter::once(&self.bottleneck_channels));
        if widths.into_iter().any(|&c| c == 0) {
            return Err(Error::InvalidArgument("channel widths must be positive".into()));
        }
        if self.batch == 0 {
            return Err(Error::InvalidArgument("batch size must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }

    fn check_extent(&self, min: usize, what: &str) -> Result<()> {
        if self.input_rows < min || self.input_cols < min {
            return Err(Error::InvalidArgument(format!(
                "{what} needs inputs of at least {min}x{min}, got {}x{}",
                self.input_rows, self.input_cols
            )));
        }
        Ok(())
    }

    /// Spatial extent of the encoder output.
    pub fn encoder_output_dims(&self) -> (usize, usize) {
        (self.input_rows - 8, self.input_cols - 8)
    }

    fn metadata(&self) -> Vec<(String, String)> {
        let list = |v: &[usize]| {
            v.iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        vec![
            ("input_rows".into(), self.input_rows.to_string()),
            ("input_cols".into(), self.input_cols.to_string()),
            ("encoder_channels".into(), list(&self.encoder_channels)),
            ("bottleneck_channels".into(), self.bottleneck_channels.to_string()),
            ("decoder_channels".into(), list(&self.decoder_channels)),
            ("epochs".into(), self.epochs.to_string()),
            ("batch".into(), self.batch.to_string()),
            ("learning_rate".into(), format!("{:?}", self.learning_rate)),
            ("seed".into(), self.seed.to_string()),
        ]
    }

    fn from_metadata(ckpt: &Checkpoint) -> Result<Self> {
        fn get<'a>(ckpt: &'a Checkpoint, key: &str) -> Result<&'a str> {
            ckpt.meta(key)
                .ok_or_else(|| Error::Data(format!("checkpoint lacks '{key}'")))
        }
        fn num<T: std::str::FromStr>(ckpt: &Checkpoint, key: &str) -> Result<T> {
            let v = get(ckpt, key)?;
            v.parse()
                .map_err(|_| Error::Data(format!("checkpoint field '{key}' = '{v}' is malformed")))
        }
        fn four(ckpt: &Checkpoint, key: &str) -> Result<[usize; 4]> {
            let v = get(ckpt, key)?;
            let parts: Vec<usize> = v
                .split(',')
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Data(format!("checkpoint field '{key}' = '{v}' is malformed")))?;
            parts
                .try_into()
                .map_err(|_| Error::Data(format!("checkpoint field '{key}' needs four widths")))
        }
        Ok(BurnNetConfig {
            input_rows: num(ckpt, "input_rows")?,
            input_cols: num(ckpt, "input_cols")?,
            encoder_channels: four(ckpt, "encoder_channels")?,
            bottleneck_channels: num(ckpt, "bottleneck_channels")?,
            decoder_channels: four(ckpt, "decoder_channels")?,
            epochs: num(ckpt, "epochs")?,
            batch: num(ckpt, "batch")?,
            learning_rate: num(ckpt, "learning_rate")?,
            seed: num(ckpt, "seed")?,
        })
    }
}

/// Classification task of the target model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskMode {
    /// Deep-partial burns (label 1) against every other burn depth (label 0).
    Binary,
    /// SP, DP, LFT, DFT as labels 0..4.
    Multiclass,
}

impl TaskMode {
    pub fn outputs(self) -> usize {
        match self {
            TaskMode::Binary => 1,
            TaskMode::Multiclass => 4,
        }
    }

    pub fn num_labels(self) -> usize {
        match self {
            TaskMode::Binary => 2,
            TaskMode::Multiclass => 4,
        }
    }

    pub fn label_of(self, class: BurnClass) -> Result<usize> {
        match (self, class) {
            (_, BurnClass::Unburned) => Err(Error::Data(
                "unburned images have no classifier label".into(),
            )),
            (TaskMode::Binary, BurnClass::DP) => Ok(1),
            (TaskMode::Binary, _) => Ok(0),
            (TaskMode::Multiclass, c) => Ok(c.severity() - 1),
        }
    }

    pub fn label_name(self, label: usize) -> &'static str {
        match (self, label) {
            (TaskMode::Binary, 0) => "Rest",
            (TaskMode::Binary, _) => "DP",
            (TaskMode::Multiclass, l) => BurnClass::BURNS[l.min(3)].as_str(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TaskMode::Binary => "binary",
            TaskMode::Multiclass => "multiclass",
        }
    }
}

impl std::str::FromStr for TaskMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "binary" => Ok(TaskMode::Binary),
            "multiclass" => Ok(TaskMode::Multiclass),
            other => Err(Error::InvalidArgument(format!("unknown task '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: usize,
    pub confidence: f64,
    /// Per-label probabilities; binary order is `[Rest, DP]`.
    pub probabilities: Vec<f64>,
}

impl Prediction {
    fn from_logits(mode: TaskMode, logits: &Tensor) -> Result<Self> {
        match mode {
            TaskMode::Binary => Ok(Self::from_binary(sigmoid_scalar(logits.data()[0]))),
            TaskMode::Multiclass => Self::from_probabilities(softmax(logits)?.into_data()),
        }
    }

    /// Binary decision from the DP probability; exactly 0.5 goes to DP.
    pub fn from_binary(p: f64) -> Self {
        Prediction {
            label: usize::from(p >= 0.5),
            confidence: p.max(1.0 - p),
            probabilities: vec![1.0 - p, p],
        }
    }

    /// Argmax with ties going to the lowest index.
    pub fn from_probabilities(probabilities: Vec<f64>) -> Result<Self> {
        let mut label = 0;
        for (i, &p) in probabilities.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::Numerical(format!("probability {i} is {p}")));
            }
            if p > probabilities[label] {
                label = i;
            }
        }
        let confidence = *probabilities
            .get(label)
            .ok_or_else(|| Error::InvalidArgument("empty probability vector".into()))?;
        Ok(Prediction {
            label,
            confidence,
            probabilities,
        })
    }
}

fn build_encoder(cfg: &BurnNetConfig) -> Result<Vec<Layer>> {
    let mut rng = Rng::derive(cfg.seed, &[TAG_ENCODER]);
    let mut layers = Vec::with_capacity(14);
    let mut cin = 1;
    for &cout in &cfg.encoder_channels {
        layers.push(Layer::Conv(Conv2d::new(cin, cout, 2, 1, &mut rng)?));
        layers.push(Layer::Relu);
        layers.push(Layer::AvgPool(AvgPool2d::default()));
        cin = cout;
    }
    layers.push(Layer::Conv(Conv2d::new(cin, cfg.bottleneck_channels, 1, 1, &mut rng)?));
    layers.push(Layer::Relu);
    Ok(layers)
}

fn build_decoder(cfg: &BurnNetConfig) -> Result<Vec<Layer>> {
    let mut rng = Rng::derive(cfg.seed, &[TAG_DECODER]);
    let mut layers = Vec::with_capacity(23);
    let mut cin = cfg.bottleneck_channels;
    for &cout in &cfg.decoder_channels {
        layers.push(Layer::Deconv(Deconv2d::new(cin, cout, 2, 2, &mut rng)?));
        layers.push(Layer::Relu);
        layers.push(Layer::Conv(Conv2d::new(cout, cout, 2, 2, &mut rng)?));
        layers.push(Layer::Relu);
        cin = cout;
    }
    layers.push(Layer::Deconv(Deconv2d::new(cin, cin, 2, 2, &mut rng)?));
    layers.push(Layer::Relu);
    layers.push(Layer::Crop(CenterCrop {
        rows: cfg.input_rows,
        cols: cfg.input_cols,
    }));
    layers.push(Layer::Conv(Conv2d::new(cin, 1, 1, 1, &mut rng)?));
    layers.push(Layer::Sigmoid);
    Ok(layers)
}

fn build_head(cfg: &BurnNetConfig, mode: TaskMode) -> Result<Vec<Layer>> {
    let mut rng = Rng::derive(cfg.seed, &[TAG_HEAD, mode.outputs() as u64]);
    Ok(vec![
        Layer::GlobalAvgPool,
        Layer::Dense(Dense::new(cfg.bottleneck_channels, mode.outputs(), &mut rng)?),
    ])
}

fn check_input(cfg: &BurnNetConfig, img: &UltrasoundImage) -> Result<()> {
    if img.dims() != (cfg.input_rows, cfg.input_cols) {
        return Err(Error::shape(
            &[cfg.input_rows, cfg.input_cols],
            &[img.rows(), img.cols()],
        ));
    }
    Ok(())
}

fn named_params(net: &Sequential) -> Vec<(String, Tensor)> {
    let mut out = Vec::new();
    for (i, layer) in net.layers().iter().enumerate() {
        for (p, suffix) in layer.params().into_iter().zip(["weight", "bias"]) {
            out.push((format!("{i:02}.{}.{suffix}", layer.name()), p.clone()));
        }
    }
    out
}

fn load_params(net: &mut Sequential, ckpt: &Checkpoint) -> Result<()> {
    let expected = named_params(net);
    if ckpt.tensors.len() != expected.len() {
        return Err(Error::Data(format!(
            "checkpoint holds {} tensors, architecture needs {}",
            ckpt.tensors.len(),
            expected.len()
        )));
    }
    for ((name, shape_ref), p) in expected.iter().zip(net.params_mut()) {
        let t = ckpt
            .tensor(name)
            .ok_or_else(|| Error::Data(format!("checkpoint lacks tensor '{name}'")))?;
        if t.shape() != shape_ref.shape() {
            return Err(Error::shape(shape_ref.shape(), t.shape()));
        }
        *p = t.clone();
    }
    Ok(())
}

/// Encoder-decoder mapping burned-skin images to unburned-skin images.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceModel {
    config: BurnNetConfig,
    /// Encoder layers followed by decoder layers.
    net: Sequential,
    encoder_len: usize,
}

impl SourceModel {
    pub fn config(&self) -> &BurnNetConfig {
        &self.config
    }

    pub fn net(&self) -> &Sequential {
        &self.net
    }

    pub(crate) fn net_mut(&mut self) -> &mut Sequential {
        &mut self.net
    }

    pub fn encoder_len(&self) -> usize {
        self.encoder_len
    }

    pub fn encoder_layers(&self) -> &[Layer] {
        &self.net.layers()[..self.encoder_len]
    }

    pub fn encoder_param_count(&self) -> usize {
        self.encoder_layers()
            .iter()
            .flat_map(Layer::params)
            .map(Tensor::numel)
            .sum()
    }

    pub fn param_count(&self) -> usize {
        self.net.param_count()
    }

    pub fn encode(&self, x: &Tensor) -> Result<Tensor> {
        let mut cur = x.clone();
        for layer in self.encoder_layers() {
            cur = layer.forward(&cur)?;
        }
        Ok(cur)
    }

    pub fn reconstruct(&self, x: &Tensor) -> Result<Tensor> {
        self.net.forward(x)
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let mut metadata = vec![("kind".to_string(), "source".to_string())];
        metadata.extend(self.config.metadata());
        Checkpoint {
            metadata,
            tensors: named_params(&self.net),
        }
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        if ckpt.meta("kind") != Some("source") {
            return Err(Error::Data("checkpoint is not a source model".into()));
        }
        let mut model = build_source(&BurnNetConfig::from_metadata(ckpt)?)?;
        load_params(&mut model.net, ckpt)?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.to_checkpoint().save(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_checkpoint(&Checkpoint::load(path)?)
    }
}

pub fn build_source(cfg: &BurnNetConfig) -> Result<SourceModel> {
    cfg.validate()?;
    cfg.check_extent(MIN_SOURCE_EXTENT, "the encoder-decoder")?;
    let mut layers = build_encoder(cfg)?;
    let encoder_len = layers.len();
    layers.extend(build_decoder(cfg)?);
    Ok(SourceModel {
        config: cfg.clone(),
        net: Sequential::new(layers),
        encoder_len,
    })
}

/// Encoder plus a global-average-pooling dense head.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetClassifier {
    config: BurnNetConfig,
    mode: TaskMode,
    /// Encoder layers followed by the head.
    net: Sequential,
    encoder_len: usize,
    frozen_encoder: bool,
}

impl TargetClassifier {
    pub fn config(&self) -> &BurnNetConfig {
        &self.config
    }

    pub fn mode(&self) -> TaskMode {
        self.mode
    }

    pub fn net(&self) -> &Sequential {
        &self.net
    }

    pub(crate) fn net_mut(&mut self) -> &mut Sequential {
        &mut self.net
    }

    /// Number of encoder layers; `net().trace(x).acts[encoder_len()]` is the
    /// bottleneck feature map.
    pub fn encoder_len(&self) -> usize {
        self.encoder_len
    }

    pub fn frozen_encoder(&self) -> bool {
        self.frozen_encoder
    }

    /// When frozen, training updates only the head.
    pub fn set_frozen_encoder(&mut self, frozen: bool) {
        self.frozen_encoder = frozen;
    }

    pub fn param_count(&self) -> usize {
        self.net.param_count()
    }

    pub fn head(&self) -> &Dense {
        match self.net.layers().last() {
            Some(Layer::Dense(d)) => d,
            _ => unreachable!("classifier ends in a dense layer"),
        }
    }

    pub fn logits(&self, x: &Tensor) -> Result<Tensor> {
        self.net.forward(x)
    }

    pub fn predict(&self, img: &UltrasoundImage) -> Result<Prediction> {
        check_input(&self.config, img)?;
        Prediction::from_logits(self.mode, &self.logits(&img.to_tensor())?)
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let mut metadata = vec![
            ("kind".to_string(), "classifier".to_string()),
            ("mode".to_string(), self.mode.as_str().to_string()),
            ("frozen_encoder".to_string(), self.frozen_encoder.to_string()),
        ];
        metadata.extend(self.config.metadata());
        Checkpoint {
            metadata,
            tensors: named_params(&self.net),
        }
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        if ckpt.meta("kind") != Some("classifier") {
            return Err(Error::Data("checkpoint is not a classifier".into()));
        }
        let mode = ckpt
            .meta("mode")
            .ok_or_else(|| Error::Data("checkpoint lacks 'mode'".into()))?
            .parse()?;
        let mut clf = build_classifier(&BurnNetConfig::from_metadata(ckpt)?, mode)?;
        clf.frozen_encoder = ckpt.meta("frozen_encoder") == Some("true");
        load_params(&mut clf.net, ckpt)?;
        Ok(clf)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.to_checkpoint().save(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_checkpoint(&Checkpoint::load(path)?)
    }
}

/// Cold-start classifier. Its encoder equals the encoder of an untrained
/// [`build_source`] model with the same config.
pub fn build_classifier(cfg: &BurnNetConfig, mode: TaskMode) -> Result<TargetClassifier> {
    cfg.validate()?;
    cfg.check_extent(MIN_CLASSIFIER_EXTENT, "the encoder")?;
    let mut layers = build_encoder(cfg)?;
    let encoder_len = layers.len();
    layers.extend(build_head(cfg, mode)?);
    Ok(TargetClassifier {
        config: cfg.clone(),
        mode,
        net: Sequential::new(layers),
        encoder_len,
        frozen_encoder: false,
    })
}

/// Drops the decoder and attaches a freshly initialized head. The encoder
/// stays trainable.
pub fn transfer_to_classifier(source: &SourceModel, mode: TaskMode) -> Result<TargetClassifier> {
    let mut layers = source.encoder_layers().to_vec();
    layers.extend(build_head(&source.config, mode)?);
    Ok(TargetClassifier {
        config: source.config.clone(),
        mode,
        net: Sequential::new(layers),
        encoder_len: source.encoder_len,
        frozen_encoder: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Provenance;

    #[test]
    fn default_shapes() {
        let cfg = BurnNetConfig::default();
        let src = build_source(&cfg).unwrap();
        let x = Tensor::filled(&[1, 22, 34], 0.5);
        assert_eq!(src.encode(&x).unwrap().shape(), &[64, 14, 26]);
        let y = src.reconstruct(&x).unwrap();
        assert_eq!(y.shape(), &[1, 22, 34]);
        assert!(y.data().iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn default_parameter_counts() {
        let cfg = BurnNetConfig::default();
        let src = build_source(&cfg).unwrap();
        assert_eq!(src.encoder_param_count(), 51_568);
        assert_eq!(src.param_count(), 215_921);
        assert_eq!(build_classifier(&cfg, TaskMode::Binary).unwrap().param_count(), 51_633);
        assert_eq!(build_classifier(&cfg, TaskMode::Multiclass).unwrap().param_count(), 51_828);
    }

    #[test]
    fn extent_limits() {
        let small = |r, c| BurnNetConfig {
            input_rows: r,
            input_cols: c,
            ..BurnNetConfig::default()
        };
        assert!(build_classifier(&small(9, 20), TaskMode::Binary).is_err());
        assert!(build_classifier(&small(10, 10), TaskMode::Binary).is_ok());
        assert!(build_source(&small(15, 20)).is_err());
        let src = build_source(&small(16, 16)).unwrap();
        let y = src.reconstruct(&Tensor::zeros(&[1, 16, 16])).unwrap();
        assert_eq!(y.shape(), &[1, 16, 16]);
    }

    #[test]
    fn transfer_copies_encoder() {
        let cfg = BurnNetConfig {
            encoder_channels: [3, 4, 5, 6],
            bottleneck_channels: 4,
            decoder_channels: [4, 3, 3, 2],
            seed: 5,
            ..BurnNetConfig::default()
        };
        let src = build_source(&cfg).unwrap();
        let mut rng = Rng::new(1);
        let x = Tensor::new(
            vec![1, 22, 34],
            (0..22 * 34).map(|_| rng.uniform()).collect(),
        )
        .unwrap();
        let before = src.encode(&x).unwrap();
        for mode in [TaskMode::Binary, TaskMode::Multiclass] {
            let clf = transfer_to_classifier(&src, mode).unwrap();
            assert_eq!(clf.head().outputs(), mode.outputs());
            assert_eq!(clf.head().inputs(), 4);
            assert!(!clf.frozen_encoder());
            let trace = clf.net().trace(&x).unwrap();
            assert_eq!(trace.acts[clf.encoder_len()], before);
        }
        let cold = build_classifier(&cfg, TaskMode::Binary).unwrap();
        assert_eq!(cold, transfer_to_classifier(&src, TaskMode::Binary).unwrap());
    }

    #[test]
    fn prediction_rules() {
        let p = Prediction::from_binary(0.9);
        assert_eq!((p.label, p.confidence), (1, 0.9));
        let p = Prediction::from_binary(0.2);
        assert_eq!(p.label, 0);
        assert!((p.confidence - 0.8).abs() < 1e-15);
        assert_eq!(Prediction::from_binary(0.5).label, 1);
        let p = Prediction::from_probabilities(vec![0.25; 4]).unwrap();
        assert_eq!((p.label, p.confidence), (0, 0.25));
        assert_eq!(TaskMode::Multiclass.label_name(p.label), "SP");
    }

    #[test]
    fn labels() {
        assert_eq!(TaskMode::Binary.label_of(BurnClass::DP).unwrap(), 1);
        assert_eq!(TaskMode::Binary.label_of(BurnClass::LFT).unwrap(), 0);
        assert_eq!(TaskMode::Multiclass.label_of(BurnClass::DFT).unwrap(), 3);
        assert!(TaskMode::Multiclass.label_of(BurnClass::Unburned).is_err());
    }

    #[test]
    fn predict_checks_shape() {
        let clf = build_classifier(&BurnNetConfig::default(), TaskMode::Binary).unwrap();
        let img = UltrasoundImage::new(20, 34, vec![0.5; 680], Provenance::Derived("x".into())).unwrap();
        assert!(matches!(clf.predict(&img), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn checkpoint_round_trip() {
        let cfg = BurnNetConfig {
            encoder_channels: [2, 3, 2, 3],
            bottleneck_channels: 2,
            decoder_channels: [2, 2, 2, 2],
            learning_rate: 0.0003,
            seed: 9,
            ..BurnNetConfig::default()
        };
        let src = build_source(&cfg).unwrap();
        assert_eq!(SourceModel::from_checkpoint(&src.to_checkpoint()).unwrap(), src);
        let mut clf = transfer_to_classifier(&src, TaskMode::Multiclass).unwrap();
        clf.set_frozen_encoder(true);
        let bytes = clf.to_checkpoint().to_bytes().unwrap();
        let back = TargetClassifier::from_checkpoint(&Checkpoint::from_bytes(&bytes).unwrap()).unwrap();
        assert_eq!(back, clf);
        assert!(TargetClassifier::from_checkpoint(&src.to_checkpoint()).is_err());
    }
}
