//! Cross-validated runs of the two-stage classifier and the texture
//! baselines, with pooled out-of-fold evaluation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{BurnClass, Fold, LabeledDataset, UltrasoundImage};
use crate::error::{Error, Result};
use crate::eval::{
    classification_metrics, multiclass_accuracy, pr_curve, roc_curve, BinaryConfusion, BinaryMetrics,
    ConfusionMatrix, Curve, TrustConfig, TrustRecord, TrustReport,
};
use crate::model::{
    build_classifier, build_source, train_classifier, train_source, transfer_to_classifier, BurnNetConfig,
    LossTrace, Pairing, SourceModel, TargetClassifier, TaskMode,
};
use crate::rng::Rng;
use crate::texture::{lda_fit, svm_rbf_fit, FeatureVector, Standardizer, SvmParams};

const TAG_SOURCE: u64 = 0x5352_4300;
const TAG_FOLD: u64 = 0x464f_4c00;

/// Class used as source-stage input; the source maps it onto unburned images.
pub const SOURCE_BURN_CLASS: BurnClass = BurnClass::DFT;

/// Unburned targets and deep full-thickness inputs for the source stage.
pub fn source_sets(dataset: &LabeledDataset) -> (Vec<UltrasoundImage>, Vec<UltrasoundImage>) {
    let pick = |c| dataset.of_class(c).into_iter().cloned().collect::<Vec<_>>();
    (pick(BurnClass::Unburned), pick(SOURCE_BURN_CLASS))
}

/// Builds and trains the encoder-decoder for `epochs` epochs.
pub fn pretrain_source(
    dataset: &LabeledDataset,
    cfg: &BurnNetConfig,
    epochs: usize,
    pairing: Pairing,
    seed: u64,
) -> Result<(SourceModel, LossTrace)> {
    let (unburned, burned) = source_sets(dataset);
    let mut model = build_source(cfg)?;
    let stage_cfg = BurnNetConfig { epochs, ..cfg.clone() };
    let mut rng = Rng::derive(seed, &[TAG_SOURCE]);
    let trace = train_source(&mut model, &unburned, &burned, &stage_cfg, pairing, &mut rng)?;
    Ok((model, trace))
}

/// One held-out prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutOfFold {
    /// Position in the cross-validated dataset.
    pub index: usize,
    pub fold: usize,
    pub truth: BurnClass,
    /// Task label of `truth`.
    pub label: usize,
    pub predicted: usize,
    pub confidence: f64,
    pub probabilities: Vec<f64>,
}

impl OutOfFold {
    pub fn correct(&self) -> bool {
        self.label == self.predicted
    }
}

#[derive(Debug, Clone)]
pub struct FoldModel {
    pub fold: usize,
    pub classifier: TargetClassifier,
    pub trace: LossTrace,
}

#[derive(Debug, Clone)]
pub struct CvRun {
    pub mode: TaskMode,
    pub folds: Vec<FoldModel>,
    /// Sorted by `index`.
    pub predictions: Vec<OutOfFold>,
}

fn check_folds(n: usize, folds: &[Fold]) -> Result<()> {
    let mut seen = vec![false; n];
    for f in folds {
        for &i in &f.test {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidArgument(format!("fold test index {i} is out of range or repeated")));
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::InvalidArgument("folds do not cover every sample".into()));
    }
    Ok(())
}

/// Held-out predictions of one classifier per fold.
pub fn predict_out_of_fold(
    classifiers: &[&TargetClassifier],
    dataset: &LabeledDataset,
    folds: &[Fold],
) -> Result<Vec<OutOfFold>> {
    if classifiers.len() != folds.len() {
        return Err(Error::InvalidArgument(format!(
            "{} classifiers for {} folds",
            classifiers.len(),
            folds.len()
        )));
    }
    check_folds(dataset.len(), folds)?;
    let mut out = Vec::with_capacity(dataset.len());
    for (f, (clf, fold)) in classifiers.iter().zip(folds).enumerate() {
        for &i in &fold.test {
            let (img, truth) = &dataset.items[i];
            let p = clf.predict(img)?;
            out.push(OutOfFold {
                index: i,
                fold: f,
                truth: *truth,
                label: clf.mode().label_of(*truth)?,
                predicted: p.label,
                confidence: p.confidence,
                probabilities: p.probabilities,
            });
        }
    }
    out.sort_by_key(|p| p.index);
    Ok(out)
}

/// Trains one classifier per fold (in parallel) and pools the held-out
/// predictions. Each fold starts from `source`'s encoder when given,
/// otherwise from the cold-start initialization, and trains with
/// `Rng::derive(seed, [TAG_FOLD, fold])`. A frozen encoder trains only the head.
pub fn cross_validate(
    dataset: &LabeledDataset,
    folds: &[Fold],
    source: Option<&SourceModel>,
    cfg: &BurnNetConfig,
    mode: TaskMode,
    frozen_encoder: bool,
    seed: u64,
) -> Result<CvRun> {
    check_folds(dataset.len(), folds)?;
    let models = folds
        .par_iter()
        .enumerate()
        .map(|(f, fold)| {
            let mut clf = match source {
                Some(s) => transfer_to_classifier(s, mode)?,
                None => build_classifier(cfg, mode)?,
            };
            clf.set_frozen_encoder(frozen_encoder);
            let mut rng = Rng::derive(seed, &[TAG_FOLD, f as u64]);
            let trace = train_classifier(&mut clf, &dataset.subset(&fold.train), cfg, &mut rng)?;
            log::info!("fold {}/{} trained, final loss {:?}", f + 1, folds.len(), trace.last());
            Ok(FoldModel { fold: f, classifier: clf, trace })
        })
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&TargetClassifier> = models.iter().map(|m| &m.classifier).collect();
    let predictions = predict_out_of_fold(&refs, dataset, folds)?;
    Ok(CvRun { mode, folds: models, predictions })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryEvaluation {
    pub confusion: BinaryConfusion,
    pub metrics: BinaryMetrics,
    pub roc: Curve,
    pub pr: Curve,
}

/// Metrics and curves for positive-class `truth`, hard decisions
/// `predicted`, and ranking `scores`.
pub fn evaluate_scores(truth: &[bool], predicted: &[bool], scores: &[f64]) -> Result<BinaryEvaluation> {
    let confusion = BinaryConfusion::from_predictions(truth, predicted)?;
    Ok(BinaryEvaluation {
        metrics: classification_metrics(&confusion)?,
        roc: roc_curve(scores, truth)?,
        pr: pr_curve(scores, truth)?,
        confusion,
    })
}

/// Binary evaluation ranked by the positive-class probability.
pub fn evaluate_binary(predictions: &[OutOfFold]) -> Result<BinaryEvaluation> {
    if let Some(p) = predictions.iter().find(|p| p.probabilities.len() != 2) {
        return Err(Error::InvalidArgument(format!(
            "sample {} has {} probabilities, expected a binary prediction",
            p.index,
            p.probabilities.len()
        )));
    }
    let truth: Vec<bool> = predictions.iter().map(|p| p.label == 1).collect();
    let predicted: Vec<bool> = predictions.iter().map(|p| p.predicted == 1).collect();
    let scores: Vec<f64> = predictions.iter().map(|p| p.probabilities[1]).collect();
    evaluate_scores(&truth, &predicted, &scores)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MulticlassEvaluation {
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
}

pub fn evaluate_multiclass(predictions: &[OutOfFold], classes: usize) -> Result<MulticlassEvaluation> {
    let truth: Vec<usize> = predictions.iter().map(|p| p.label).collect();
    let predicted: Vec<usize> = predictions.iter().map(|p| p.predicted).collect();
    let confusion = ConfusionMatrix::from_predictions(classes, &truth, &predicted)?;
    Ok(MulticlassEvaluation {
        accuracy: multiclass_accuracy(&confusion)?,
        confusion,
    })
}

/// Trust records grouped under the task's label names.
pub fn trust_report(predictions: &[OutOfFold], mode: TaskMode, cfg: &TrustConfig) -> Result<TrustReport> {
    let records = predictions
        .iter()
        .map(|p| TrustRecord::new(p.confidence, p.predicted, p.label))
        .collect::<Result<Vec<_>>>()?;
    let names: Vec<&str> = (0..mode.num_labels()).map(|l| mode.label_name(l)).collect();
    TrustReport::from_records(&records, &names, cfg)
}

/// Held-out scores of both texture baselines for one sample. Positive
/// scores predict deep partial thickness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineOutOfFold {
    pub index: usize,
    pub fold: usize,
    pub truth: BurnClass,
    pub lda_score: f64,
    pub svm_score: f64,
}

/// LDA on the raw features (it standardizes internally) and an RBF SVM on
/// features standardized with training-fold statistics, trained per fold on
/// the binary deep-partial-versus-rest task.
pub fn baseline_cross_validate(
    features: &[FeatureVector],
    classes: &[BurnClass],
    folds: &[Fold],
    svm: &SvmParams,
) -> Result<Vec<BaselineOutOfFold>> {
    if features.len() != classes.len() {
        return Err(Error::shape(&[classes.len()], &[features.len()]));
    }
    check_folds(classes.len(), folds)?;
    let rows: Vec<Vec<f64>> = features.iter().map(FeatureVector::to_vec).collect();
    let positive: Vec<bool> = classes
        .iter()
        .map(|&c| TaskMode::Binary.label_of(c).map(|l| l == 1))
        .collect::<Result<_>>()?;
    let per_fold = folds
        .par_iter()
        .enumerate()
        .map(|(f, fold)| {
            let x: Vec<Vec<f64>> = fold.train.iter().map(|&i| rows[i].clone()).collect();
            let y: Vec<bool> = fold.train.iter().map(|&i| positive[i]).collect();
            let lda = lda_fit(&x, &y)?;
            let scaler = Standardizer::fit(&x)?;
            let xs = x.iter().map(|r| scaler.transform(r)).collect::<Result<Vec<_>>>()?;
            let model = svm_rbf_fit(&xs, &y, svm)?;
            fold.test
                .iter()
                .map(|&i| {
                    Ok(BaselineOutOfFold {
                        index: i,
                        fold: f,
                        truth: classes[i],
                        lda_score: lda.score(&rows[i])?,
                        svm_score: model.score(&scaler.transform(&rows[i])?),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out: Vec<BaselineOutOfFold> = per_fold.into_iter().flatten().collect();
    out.sort_by_key(|p| p.index);
    Ok(out)
}

/// Evaluation of the LDA and SVM columns of a baseline run, in that order.
pub fn evaluate_baselines(predictions: &[BaselineOutOfFold]) -> Result<(BinaryEvaluation, BinaryEvaluation)> {
    let truth: Vec<bool> = predictions.iter().map(|p| p.truth == BurnClass::DP).collect();
    let eval = |scores: Vec<f64>| {
        let predicted: Vec<bool> = scores.iter().map(|&s| s > 0.0).collect();
        evaluate_scores(&truth, &predicted, &scores)
    };
    Ok((
        eval(predictions.iter().map(|p| p.lda_score).collect())?,
        eval(predictions.iter().map(|p| p.svm_score).collect())?,
    ))
}
