use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{check_input, BurnNetConfig, Prediction, SourceModel, TargetClassifier, TaskMode};
use crate::data::{hflip, LabeledDataset, UltrasoundImage};
use crate::error::{Error, Result};
use crate::nn::loss::{
    reconstruction_loss, reconstruction_loss_grad, sigmoid_bce_with_logit, softmax_ce_with_logits,
};
use crate::nn::{Adam, ReluMode, Sequential};
use crate::rng::Rng;
use crate::tensor::Tensor;

/// How source-stage inputs are matched with targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pairing {
    /// Each burned image gets a uniformly drawn unburned target, redrawn every epoch.
    #[default]
    Unpaired,
    /// Input `i` is matched with target `i`; both sets must have equal length.
    Paired,
}

/// Per-epoch mean training loss.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LossTrace(pub Vec<f64>);

impl LossTrace {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<f64> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<f64> {
        self.0.last().copied()
    }

    /// `epoch,loss` rows with 1-based epochs and round-trip float formatting.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,loss\n");
        for (i, l) in self.0.iter().enumerate() {
            let _ = writeln!(s, "{},{l:?}", i + 1);
        }
        s
    }
}

/// One Adam update from per-sample gradient closures. Gradients are summed in
/// sample order and divided by the batch size. Returns the summed loss.
fn minibatch_step(
    net: &mut Sequential,
    adam: &mut Adam,
    batch: &[usize],
    mut sample: impl FnMut(&Sequential, usize, &mut [Tensor]) -> Result<f64>,
) -> Result<f64> {
    let mut grads = net.zero_grads();
    let mut total = 0.0;
    for &i in batch {
        total += sample(net, i, &mut grads)?;
    }
    let inv = 1.0 / batch.len() as f64;
    for g in &mut grads {
        for v in g.data_mut() {
            *v *= inv;
        }
    }
    adam.step(&mut net.params_mut(), &grads)?;
    Ok(total)
}

fn with_epoch(epoch: usize, e: Error) -> Error {
    match e {
        Error::Numerical(msg) => Error::Numerical(format!("epoch {epoch}: {msg}")),
        other => other,
    }
}

fn check_finite(epoch: usize, loss: f64) -> Result<()> {
    if loss.is_finite() {
        Ok(())
    } else {
        Err(Error::Numerical(format!("training loss became {loss} at epoch {epoch}")))
    }
}

/// Trains the encoder-decoder to map `burned` images onto `unburned` ones.
///
/// Runs `cfg.epochs` epochs of minibatch Adam on the reconstruction loss.
/// Epoch `e` shuffles the inputs and draws targets from
/// `Rng::derive(base, [e])`, where `base` is one draw from `rng`.
pub fn train_source(
    model: &mut SourceModel,
    unburned: &[UltrasoundImage],
    burned: &[UltrasoundImage],
    cfg: &BurnNetConfig,
    pairing: Pairing,
    rng: &mut Rng,
) -> Result<LossTrace> {
    cfg.validate()?;
    if unburned.is_empty() || burned.is_empty() {
        return Err(Error::Data(format!(
            "source training needs both sets non-empty ({} unburned, {} burned)",
            unburned.len(),
            burned.len()
        )));
    }
    if pairing == Pairing::Paired && unburned.len() != burned.len() {
        return Err(Error::Data(format!(
            "paired source training needs equal set sizes, got {} and {}",
            unburned.len(),
            burned.len()
        )));
    }
    for img in unburned.iter().chain(burned) {
        check_input(&model.config, img)?;
    }
    let inputs: Vec<Tensor> = burned.iter().map(UltrasoundImage::to_tensor).collect();
    let targets: Vec<Tensor> = unburned.iter().map(UltrasoundImage::to_tensor).collect();
    let base = rng.next_u64();
    let mut adam = Adam::with_lr(model.net.params(), cfg.learning_rate);
    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let mut erng = Rng::derive(base, &[epoch as u64]);
        let mut order: Vec<usize> = (0..inputs.len()).collect();
        erng.shuffle(&mut order);
        let pick: Vec<usize> = match pairing {
            Pairing::Unpaired => (0..inputs.len()).map(|_| erng.below(targets.len())).collect(),
            Pairing::Paired => (0..inputs.len()).collect(),
        };
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch) {
            epoch_loss += minibatch_step(model.net_mut(), &mut adam, batch, |net, i, grads| {
                let t = net.trace(&inputs[i])?;
                let target = &targets[pick[i]];
                let loss = reconstruction_loss(target, t.output())?;
                let dy = reconstruction_loss_grad(target, t.output())?;
                net.backward(&t, &dy, Some(grads), ReluMode::Standard, 0, false)?;
                Ok(loss)
            })
            .map_err(|e| with_epoch(epoch, e))?;
        }
        let mean = epoch_loss / inputs.len() as f64;
        check_finite(epoch, mean)?;
        trace.push(mean);
    }
    Ok(LossTrace(trace))
}

/// Trains the classifier on `dataset` plus its horizontal flips.
///
/// Binary mode uses the sigmoid cross-entropy of the single logit, multiclass
/// mode the softmax cross-entropy. Epoch shuffling follows the same seeding
/// scheme as [`train_source`].
pub fn train_classifier(
    clf: &mut TargetClassifier,
    dataset: &LabeledDataset,
    cfg: &BurnNetConfig,
    rng: &mut Rng,
) -> Result<LossTrace> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::Data("classifier training set is empty".into()));
    }
    let mode = clf.mode;
    let labels = dataset
        .labels()
        .into_iter()
        .map(|c| mode.label_of(c))
        .collect::<Result<Vec<_>>>()?;
    if mode == TaskMode::Binary && !(labels.contains(&0) && labels.contains(&1)) {
        return Err(Error::Data(
            "binary training needs both DP and non-DP samples".into(),
        ));
    }
    let mut inputs = Vec::with_capacity(2 * dataset.len());
    for (img, _) in &dataset.items {
        check_input(&clf.config, img)?;
        inputs.push(img.to_tensor());
    }
    for (img, _) in &dataset.items {
        inputs.push(hflip(img).to_tensor());
    }
    let labels: Vec<usize> = labels.iter().chain(&labels).copied().collect();

    let stop = if clf.frozen_encoder { clf.encoder_len } else { 0 };
    let base = rng.next_u64();
    let mut adam = Adam::with_lr(clf.net.params(), cfg.learning_rate);
    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let mut order: Vec<usize> = (0..inputs.len()).collect();
        Rng::derive(base, &[epoch as u64]).shuffle(&mut order);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch) {
            epoch_loss += minibatch_step(clf.net_mut(), &mut adam, batch, |net, i, grads| {
                let t = net.trace(&inputs[i])?;
                let (loss, dy) = match mode {
                    TaskMode::Binary => {
                        let (l, g) = sigmoid_bce_with_logit(labels[i] as f64, t.output().data()[0])?;
                        (l, Tensor::from_slice(&[g]))
                    }
                    TaskMode::Multiclass => softmax_ce_with_logits(labels[i], t.output())?,
                };
                net.backward(&t, &dy, Some(grads), ReluMode::Standard, stop, false)?;
                Ok(loss)
            })
            .map_err(|e| with_epoch(epoch, e))?;
        }
        let mean = epoch_loss / inputs.len() as f64;
        check_finite(epoch, mean)?;
        trace.push(mean);
    }
    Ok(LossTrace(trace))
}

/// Fraction of `dataset` whose predicted label matches the task label.
pub fn accuracy(clf: &TargetClassifier, dataset: &LabeledDataset) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::Data("accuracy of an empty dataset".into()));
    }
    let mut hits = 0usize;
    for (img, class) in &dataset.items {
        let Prediction { label, .. } = clf.predict(img)?;
        hits += usize::from(label == clf.mode.label_of(*class)?);
    }
    Ok(hits as f64 / dataset.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::super::{build_classifier, build_source};
    use super::*;
    use crate::data::{BurnClass, Provenance};

    fn tiny() -> BurnNetConfig {
        BurnNetConfig {
            input_rows: 16,
            input_cols: 18,
            encoder_channels: [2, 3, 3, 2],
            bottleneck_channels: 2,
            decoder_channels: [2, 2, 2, 2],
            epochs: 3,
            batch: 4,
            seed: 3,
            ..BurnNetConfig::default()
        }
    }

    fn images(n: usize, rows: usize, cols: usize, seed: u64) -> Vec<UltrasoundImage> {
        let mut rng = Rng::new(seed);
        (0..n)
            .map(|_| {
                let px = (0..rows * cols).map(|_| rng.uniform()).collect();
                UltrasoundImage::new(rows, cols, px, Provenance::Derived("r".into())).unwrap()
            })
            .collect()
    }

    #[test]
    fn zero_epochs_leave_model_unchanged() {
        let cfg = BurnNetConfig { epochs: 0, ..tiny() };
        let mut m = build_source(&cfg).unwrap();
        let before = m.clone();
        let imgs = images(3, 16, 18, 1);
        let t = train_source(&mut m, &imgs, &imgs, &cfg, Pairing::Unpaired, &mut Rng::new(0)).unwrap();
        assert!(t.is_empty());
        assert_eq!(m, before);
    }

    #[test]
    fn source_training_is_deterministic() {
        let cfg = tiny();
        let u = images(5, 16, 18, 1);
        let b = images(6, 16, 18, 2);
        let run = || {
            let mut m = build_source(&cfg).unwrap();
            let t = train_source(&mut m, &u, &b, &cfg, Pairing::Unpaired, &mut Rng::new(4)).unwrap();
            (m, t)
        };
        let (m1, t1) = run();
        let (m2, t2) = run();
        assert_eq!(t1.len(), 3);
        assert_eq!(t1, t2);
        assert_eq!(m1.to_checkpoint().to_bytes().unwrap(), m2.to_checkpoint().to_bytes().unwrap());
    }

    #[test]
    fn source_errors() {
        let cfg = tiny();
        let mut m = build_source(&cfg).unwrap();
        let u = images(2, 16, 18, 1);
        let mut rng = Rng::new(0);
        assert!(train_source(&mut m, &[], &u, &cfg, Pairing::Unpaired, &mut rng).is_err());
        assert!(train_source(&mut m, &u, &u[..1], &cfg, Pairing::Paired, &mut rng).is_err());
        let wrong = images(1, 17, 18, 1);
        assert!(train_source(&mut m, &u, &wrong, &cfg, Pairing::Unpaired, &mut rng).is_err());
    }

    #[test]
    fn classifier_rejects_single_class_binary() {
        let cfg = tiny();
        let mut clf = build_classifier(&cfg, TaskMode::Binary).unwrap();
        let ds = LabeledDataset::new(
            "one",
            images(4, 16, 18, 1).into_iter().map(|i| (i, BurnClass::SP)).collect(),
        )
        .unwrap();
        let err = train_classifier(&mut clf, &ds, &cfg, &mut Rng::new(0)).unwrap_err();
        assert!(matches!(err, Error::Data(_)));
    }

    #[test]
    fn frozen_encoder_only_moves_head() {
        let cfg = tiny();
        let mut clf = build_classifier(&cfg, TaskMode::Multiclass).unwrap();
        clf.set_frozen_encoder(true);
        let before = clf.clone();
        let ds = LabeledDataset::new(
            "x",
            images(8, 16, 18, 5)
                .into_iter()
                .zip(BurnClass::BURNS.iter().cycle())
                .map(|(i, &c)| (i, c))
                .collect(),
        )
        .unwrap();
        let t = train_classifier(&mut clf, &ds, &cfg, &mut Rng::new(1)).unwrap();
        assert!(t.0.iter().all(|l| l.is_finite()));
        let n = clf.encoder_len();
        assert_eq!(clf.net().layers()[..n], before.net().layers()[..n]);
        assert_ne!(clf.head(), before.head());
    }

    #[test]
    fn trace_csv() {
        let t = LossTrace(vec![0.5, 0.25]);
        assert_eq!(t.to_csv(), "epoch,loss\n1,0.5\n2,0.25\n");
    }
}
