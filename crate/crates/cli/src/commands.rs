//! The CLI verbs. Each takes a prepared [`Run`] and writes its artifacts
//! under the run's output directory.

use std::path::Path;

use burnnet::data::{
    downsample, generate_dataset, kfold_split, load_image_dir, write_snapshot, BurnClass, Fold, LabeledDataset,
    Manifest,
};
use burnnet::eval::{BinaryConfusion, BinaryMetrics, Curve};
use burnnet::experiment::{
    baseline_cross_validate, cross_validate, evaluate_baselines, evaluate_binary, evaluate_multiclass,
    predict_out_of_fold, pretrain_source, trust_report, BaselineOutOfFold, BinaryEvaluation, OutOfFold,
};
use burnnet::model::{LossTrace, TargetClassifier, TaskMode};
use burnnet::saliency::{class_average_heatmap, depth_profile, guided_gradcam_pp, Heatmap};
use burnnet::texture::{extract_dataset, features_to_csv};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::artifacts::{
    load_checkpoint, read_json, save_checkpoint, write_csv, write_json, write_png, write_text, Layout, Meta,
};
use crate::config::{DataSource, RunConfig};
use crate::error::{CliError, Result};
use crate::plot::{line_chart, Axes, Series};

/// A validated configuration with its metadata and output layout.
#[derive(Debug, Clone)]
pub struct Run {
    pub cfg: RunConfig,
    pub meta: Meta,
    pub layout: Layout,
}

/// The dataset at full resolution and at network resolution.
#[derive(Debug, Clone)]
pub struct RunData {
    pub full: LabeledDataset,
    pub small: LabeledDataset,
}

impl RunData {
    /// Burned classes at network resolution, in dataset order.
    pub fn targets(&self) -> LabeledDataset {
        self.small.filter_classes(&BurnClass::BURNS)
    }

    pub fn targets_full(&self) -> LabeledDataset {
        self.full.filter_classes(&BurnClass::BURNS)
    }
}

impl Run {
    /// Validates `cfg`, loads or generates the dataset, and echoes the
    /// effective configuration into the output directory.
    pub fn prepare(cfg: RunConfig) -> Result<(Run, RunData)> {
        let mut cfg = cfg.finalize()?;
        let full = match cfg.data.source {
            DataSource::Synthetic => {
                let per_class: Vec<(BurnClass, usize)> =
                    BurnClass::ALL.iter().map(|&c| (c, cfg.data.per_class)).collect();
                generate_dataset("phantoms", &per_class, &cfg.data.phantom, cfg.seed, cfg.data.rows, cfg.data.cols)?
            }
            DataSource::Directory => {
                let dir = cfg.data.directory.clone().expect("validated directory");
                let manifest_path = dir.join(burnnet::data::io::MANIFEST_FILE);
                let manifest = if manifest_path.exists() { Manifest::read(&manifest_path)? } else { Manifest::default() };
                let ds = load_image_dir(&dir, &manifest)?;
                let (rows, cols) = ds
                    .dims()
                    .ok_or_else(|| burnnet::Error::Data(format!("no images found under {}", dir.display())))?;
                cfg.data.rows = rows;
                cfg.data.cols = cols;
                cfg.model.input_rows = rows.div_ceil(cfg.data.downsample);
                cfg.model.input_cols = cols.div_ceil(cfg.data.downsample);
                ds
            }
        };
        let factor = cfg.data.downsample;
        let small = full.map_images(|img| downsample(img, factor))?;
        let meta = Meta::new(cfg.hash(), cfg.seed);
        let layout = Layout::new(&cfg.output);
        let run = Run { cfg, meta, layout };
        write_text(
            &run.layout.effective_config(),
            &format!(
                "# config_hash={} seed={} version={}\n{}",
                run.meta.config_hash,
                run.meta.seed,
                run.meta.version,
                run.cfg.to_toml()
            ),
        )?;
        Ok((run, RunData { full, small }))
    }

    fn folds(&self, data: &RunData) -> Result<Vec<Fold>> {
        Ok(kfold_split(&data.targets().labels(), self.cfg.folds, self.cfg.seed)?)
    }

    fn read_folds(&self, data: &RunData) -> Result<Vec<Fold>> {
        let path = self.layout.folds_file();
        let saved: crate::artifacts::Envelope<FoldsBody> = read_json(&path, "train")?;
        if saved.body.folds != self.folds(data)? {
            return Err(CliError::Artifact {
                path,
                message: "fold assignment does not match the current dataset and config".into(),
            });
        }
        Ok(saved.body.folds)
    }

    fn load_classifiers(&self, folds: usize) -> Result<Vec<TargetClassifier>> {
        (0..folds)
            .map(|f| {
                let path = self.layout.fold_checkpoint(f);
                let clf = TargetClassifier::from_checkpoint(&load_checkpoint(&path)?)?;
                if clf.mode() != self.cfg.task {
                    return Err(CliError::Artifact {
                        path,
                        message: format!("checkpoint is a {} classifier, config asks for {}", clf.mode().as_str(), self.cfg.task.as_str()),
                    });
                }
                Ok(clf)
            })
            .collect()
    }

    fn csv(&self, path: &Path, schema: &str, body: &str) -> Result<()> {
        write_csv(path, schema, &self.meta, body)
    }

    fn json<T: Serialize>(&self, path: &Path, schema: &str, body: &T) -> Result<()> {
        write_json(path, schema, &self.meta, body)
    }

    fn svg(&self, path: &Path, axes: &Axes, series: &[Series]) -> Result<()> {
        write_text(path, &line_chart(axes, series, &self.meta))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCount {
    pub class: BurnClass,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateSummary {
    pub images: usize,
    pub rows: usize,
    pub cols: usize,
    pub classes: Vec<ClassCount>,
}

/// Writes the dataset as class folders of PNGs with `index.csv` and `manifest.csv`.
pub fn cmd_generate(run: &Run, data: &RunData) -> Result<GenerateSummary> {
    let dir = run.layout.data_dir();
    let files = write_snapshot(&data.full, &dir)?;
    let (rows, cols) = data.full.dims().unwrap_or((0, 0));
    let summary = GenerateSummary {
        images: files.len(),
        rows,
        cols,
        classes: data.full.class_counts().into_iter().map(|(class, count)| ClassCount { class, count }).collect(),
    };
    run.json(&dir.join("generate.json"), "burnnet.generate/1", &summary)?;
    log::info!("wrote {} images to {}", files.len(), dir.display());
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FoldsBody {
    folds: Vec<Fold>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub task: TaskMode,
    pub folds: usize,
    pub pretrained: bool,
    pub source_final_loss: Option<f64>,
    pub fold_final_losses: Vec<f64>,
}

fn loss_series(trace: &LossTrace) -> Vec<(f64, f64)> {
    trace.0.iter().enumerate().map(|(i, &l)| ((i + 1) as f64, l)).collect()
}

/// Optional source pre-training, then one classifier per fold.
pub fn cmd_train(run: &Run, data: &RunData) -> Result<TrainSummary> {
    let cfg = &run.cfg;
    let target = data.targets();
    let folds = run.folds(data)?;
    run.json(&run.layout.folds_file(), "burnnet.folds/1", &FoldsBody { folds: folds.clone() })?;

    let source = if cfg.pretrain {
        log::info!("pre-training the encoder-decoder for {} epochs", cfg.source_epochs);
        let (model, trace) = pretrain_source(&data.small, &cfg.model, cfg.source_epochs, cfg.pairing, cfg.seed)?;
        let dir = run.layout.source_dir();
        save_checkpoint(&run.layout.source_checkpoint(), model.to_checkpoint(), &run.meta)?;
        run.csv(&dir.join("loss.csv"), "burnnet.loss/1", &trace.to_csv())?;
        run.svg(
            &dir.join("loss.svg"),
            &Axes { title: "Source reconstruction loss", x_label: "epoch", y_label: "loss", x_range: None, y_range: None },
            &[Series { name: "source", points: loss_series(&trace) }],
        )?;
        Some((model, trace))
    } else {
        None
    };

    log::info!("training {} folds for {} epochs", folds.len(), cfg.model.epochs);
    let cv = cross_validate(
        &target,
        &folds,
        source.as_ref().map(|s| &s.0),
        &cfg.model,
        cfg.task,
        cfg.frozen_encoder,
        cfg.seed,
    )?;
    for fm in &cv.folds {
        save_checkpoint(&run.layout.fold_checkpoint(fm.fold), fm.classifier.to_checkpoint(), &run.meta)?;
        run.csv(&run.layout.fold_dir(fm.fold).join("loss.csv"), "burnnet.loss/1", &fm.trace.to_csv())?;
    }
    let names: Vec<String> = cv.folds.iter().map(|fm| format!("fold {}", fm.fold)).collect();
    let series: Vec<Series> = cv
        .folds
        .iter()
        .zip(&names)
        .map(|(fm, name)| Series { name, points: loss_series(&fm.trace) })
        .collect();
    run.svg(
        &run.layout.root.join("folds").join("loss.svg"),
        &Axes { title: "Classifier loss per fold", x_label: "epoch", y_label: "loss", x_range: None, y_range: None },
        &series,
    )?;
    let summary = TrainSummary {
        task: cfg.task,
        folds: folds.len(),
        pretrained: source.is_some(),
        source_final_loss: source.as_ref().and_then(|s| s.1.last()),
        fold_final_losses: cv.folds.iter().map(|f| f.trace.last().unwrap_or(f64::NAN)).collect(),
    };
    run.json(&run.layout.root.join("train.json"), "burnnet.train/1", &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PredictionsBody {
    task: TaskMode,
    predictions: Vec<OutOfFold>,
}

/// Binary metrics as reported: confusion counts, the five metrics, and curve areas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryReport {
    pub classifier: String,
    pub samples: u64,
    pub confusion: BinaryConfusion,
    pub metrics: BinaryMetrics,
    pub roc_auc: f64,
    pub pr_auc: f64,
}

impl BinaryReport {
    fn new(classifier: &str, e: &BinaryEvaluation) -> Self {
        BinaryReport {
            classifier: classifier.to_string(),
            samples: e.confusion.total(),
            confusion: e.confusion,
            metrics: e.metrics,
            roc_auc: e.roc.auc,
            pr_auc: e.pr.auc,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MulticlassReport {
    pub classes: Vec<String>,
    /// Rows are true classes, columns predictions.
    pub confusion: Vec<Vec<u64>>,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "lowercase")]
pub enum EvaluationReport {
    Binary(BinaryReport),
    Multiclass(MulticlassReport),
}

fn predictions_csv(preds: &[OutOfFold]) -> String {
    let k = preds.first().map_or(0, |p| p.probabilities.len());
    let mut out = String::from("index,fold,truth,label,predicted,confidence");
    for j in 0..k {
        out.push_str(&format!(",p{j}"));
    }
    out.push('\n');
    for p in preds {
        out.push_str(&format!("{},{},{},{},{},{}", p.index, p.fold, p.truth, p.label, p.predicted, p.confidence));
        for v in &p.probabilities {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

fn write_curves(run: &Run, dir: &Path, tag: &str, named: &[(&str, &Curve, &Curve)]) -> Result<()> {
    for (name, roc, pr) in named {
        let prefix = if named.len() == 1 { String::new() } else { format!("{}_", name.to_lowercase()) };
        run.csv(&dir.join(format!("{prefix}roc.csv")), "burnnet.roc/1", &roc.to_csv("fpr", "tpr"))?;
        run.csv(&dir.join(format!("{prefix}pr.csv")), "burnnet.pr/1", &pr.to_csv("recall", "precision"))?;
    }
    let unit = Some((0.0, 1.0));
    let roc: Vec<Series> = named.iter().map(|(n, r, _)| Series { name: n, points: r.points.clone() }).collect();
    let pr: Vec<Series> = named.iter().map(|(n, _, p)| Series { name: n, points: p.points.clone() }).collect();
    run.svg(
        &dir.join("roc.svg"),
        &Axes { title: &format!("ROC ({tag})"), x_label: "false-positive rate", y_label: "true-positive rate", x_range: unit, y_range: unit },
        &roc,
    )?;
    run.svg(
        &dir.join("pr.svg"),
        &Axes { title: &format!("Precision-recall ({tag})"), x_label: "recall", y_label: "precision", x_range: unit, y_range: unit },
        &pr,
    )
}

/// Pooled out-of-fold predictions of the saved fold classifiers.
pub fn cmd_evaluate(run: &Run, data: &RunData) -> Result<EvaluationReport> {
    let folds = run.read_folds(data)?;
    let classifiers = run.load_classifiers(folds.len())?;
    let refs: Vec<&TargetClassifier> = classifiers.iter().collect();
    let preds = predict_out_of_fold(&refs, &data.targets(), &folds)?;
    let dir = run.layout.evaluation_dir();
    run.json(
        &run.layout.predictions_file(),
        "burnnet.predictions/1",
        &PredictionsBody { task: run.cfg.task, predictions: preds.clone() },
    )?;
    run.csv(&dir.join("predictions.csv"), "burnnet.predictions/1", &predictions_csv(&preds))?;
    let report = match run.cfg.task {
        TaskMode::Binary => {
            let e = evaluate_binary(&preds)?;
            write_curves(run, &dir, "pooled out-of-fold", &[("BurnNet", &e.roc, &e.pr)])?;
            EvaluationReport::Binary(BinaryReport::new("BurnNet", &e))
        }
        TaskMode::Multiclass => {
            let k = TaskMode::Multiclass.num_labels();
            let e = evaluate_multiclass(&preds, k)?;
            EvaluationReport::Multiclass(MulticlassReport {
                classes: (0..k).map(|l| TaskMode::Multiclass.label_name(l).to_string()).collect(),
                confusion: e.confusion.rows(),
                accuracy: e.accuracy,
            })
        }
    };
    run.json(&dir.join("metrics.json"), "burnnet.metrics/1", &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub rows: Vec<BinaryReport>,
}

fn baseline_csv(preds: &[BaselineOutOfFold]) -> String {
    let mut out = String::from("index,fold,truth,lda_score,svm_score\n");
    for p in preds {
        out.push_str(&format!("{},{},{},{},{}\n", p.index, p.fold, p.truth, p.lda_score, p.svm_score));
    }
    out
}

/// GLCM features from full-resolution images, LDA and RBF-SVM on the same
/// folds as the network, binary task.
pub fn cmd_baseline(run: &Run, data: &RunData) -> Result<BaselineReport> {
    let folds = if run.layout.folds_file().exists() { run.read_folds(data)? } else { run.folds(data)? };
    let target = data.targets_full();
    let features = extract_dataset(&target)?;
    let labels = target.labels();
    let dir = run.layout.baseline_dir();
    let rows: Vec<_> = features.iter().cloned().zip(labels.iter().copied()).collect();
    run.csv(&dir.join("features.csv"), "burnnet.features/1", &features_to_csv(&rows))?;
    let preds = baseline_cross_validate(&features, &labels, &folds, &run.cfg.svm)?;
    run.csv(&dir.join("predictions.csv"), "burnnet.baseline-predictions/1", &baseline_csv(&preds))?;
    let (lda, svm) = evaluate_baselines(&preds)?;
    write_curves(run, &dir, "texture baselines", &[("LDA", &lda.roc, &lda.pr), ("SVM", &svm.roc, &svm.pr)])?;
    let report = BaselineReport { rows: vec![BinaryReport::new("LDA", &lda), BinaryReport::new("SVM", &svm)] };
    run.json(&dir.join("metrics.json"), "burnnet.baseline/1", &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSpectrum {
    pub class: String,
    pub count: usize,
    pub spectrum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustSummary {
    pub task: TaskMode,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub normalized_density: bool,
    pub classes: Vec<ClassSpectrum>,
    pub net_trust_score: f64,
}

/// Trust spectrum, densities and NetTrustScore of the evaluated predictions.
pub fn cmd_trust(run: &Run) -> Result<TrustSummary> {
    let saved: crate::artifacts::Envelope<PredictionsBody> = read_json(&run.layout.predictions_file(), "evaluate")?;
    if saved.body.task != run.cfg.task {
        return Err(CliError::Artifact {
            path: run.layout.predictions_file(),
            message: format!("predictions are for the {} task", saved.body.task.as_str()),
        });
    }
    let report = trust_report(&saved.body.predictions, run.cfg.task, &run.cfg.trust)?;
    let dir = run.layout.trust_dir();
    run.csv(&dir.join("density.csv"), "burnnet.trust-density/1", &report.density_csv())?;
    let series: Vec<Series> = report
        .classes
        .iter()
        .map(|c| Series { name: &c.class, points: c.density.x.iter().copied().zip(c.density.rho.iter().copied()).collect() })
        .collect();
    run.svg(
        &dir.join("density.svg"),
        &Axes { title: "Trust density", x_label: "question-answer trust", y_label: "density", x_range: Some((0.0, 1.0)), y_range: None },
        &series,
    )?;
    let summary = TrustSummary {
        task: run.cfg.task,
        alpha: run.cfg.trust.alpha,
        beta: run.cfg.trust.beta,
        gamma: run.cfg.trust.gamma,
        normalized_density: run.cfg.trust.normalized,
        classes: report
            .classes
            .iter()
            .map(|c| ClassSpectrum { class: c.class.clone(), count: c.count, spectrum: c.spectrum })
            .collect(),
        net_trust_score: report.net_trust_score,
    };
    run.json(&dir.join("trust.json"), "burnnet.trust/1", &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSaliency {
    pub class: BurnClass,
    pub samples: usize,
    pub rows: usize,
    pub cols: usize,
    /// Mean of the class-average heatmap's depth-profile means.
    pub integrated_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainSummary {
    pub layer: usize,
    pub classes: Vec<ClassSaliency>,
}

/// Guided Grad-CAM++ maps of every sample under its own fold's classifier,
/// explained for the sample's true label, averaged per burn class.
pub fn cmd_explain(run: &Run, data: &RunData) -> Result<ExplainSummary> {
    let folds = run.read_folds(data)?;
    let classifiers = run.load_classifiers(folds.len())?;
    let target = data.targets();
    let mut fold_of = vec![0; target.len()];
    for (f, fold) in folds.iter().enumerate() {
        for &i in &fold.test {
            fold_of[i] = f;
        }
    }
    let layer = run.cfg.explain.layer;
    let maps = target
        .items
        .par_iter()
        .enumerate()
        .map(|(i, (img, class))| {
            let clf = &classifiers[fold_of[i]];
            Ok((*class, guided_gradcam_pp(clf, img, clf.mode().label_of(*class)?, layer)?))
        })
        .collect::<Result<Vec<(BurnClass, Heatmap)>>>()?;
    let dir = run.layout.explain_dir();
    let mut classes = Vec::new();
    let mut series = Vec::new();
    for class in BurnClass::BURNS {
        let group: Vec<Heatmap> = maps.iter().filter(|(c, _)| *c == class).map(|(_, m)| m.clone()).collect();
        if group.is_empty() {
            return Err(burnnet::Error::Data(format!("no samples of class {class} to explain")).into());
        }
        let avg = class_average_heatmap(&group)?;
        let profile = depth_profile(&avg);
        write_png(&dir.join(format!("{class}.png")), avg.rows(), avg.cols(), avg.values(), &run.meta)?;
        run.csv(&dir.join(format!("{class}.csv")), "burnnet.heatmap/1", &avg.to_csv())?;
        run.csv(&dir.join(format!("{class}_profile.csv")), "burnnet.depth-profile/1", &profile.to_csv())?;
        series.push((class, profile.mean.iter().enumerate().map(|(r, &m)| (r as f64, m)).collect::<Vec<_>>()));
        classes.push(ClassSaliency {
            class,
            samples: group.len(),
            rows: avg.rows(),
            cols: avg.cols(),
            integrated_mean: profile.integrated_mean(),
        });
    }
    let names: Vec<String> = series.iter().map(|(c, _)| c.to_string()).collect();
    let plotted: Vec<Series> = series
        .iter()
        .zip(&names)
        .map(|((_, pts), name)| Series { name, points: pts.clone() })
        .collect();
    run.svg(
        &dir.join("profiles.svg"),
        &Axes { title: "Depth profile of class-average heatmaps", x_label: "depth row", y_label: "mean intensity", x_range: None, y_range: Some((0.0, 1.0)) },
        &plotted,
    )?;
    let summary = ExplainSummary {
        layer: layer.unwrap_or(classifiers[0].encoder_len() - 1),
        classes,
    };
    run.json(&dir.join("summary.json"), "burnnet.explain/1", &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullReport {
    pub train: TrainSummary,
    pub evaluation: EvaluationReport,
    pub baseline: Option<BaselineReport>,
    pub trust: TrustSummary,
    pub explain: ExplainSummary,
}

fn report_markdown(run: &Run, r: &FullReport) -> String {
    let mut md = format!(
        "# burnnet run report\n\nconfig hash `{}`, seed {}, {}\n\n## Classification ({})\n\n",
        run.meta.config_hash,
        run.meta.seed,
        run.meta.version,
        run.cfg.task.as_str()
    );
    let mut binary_rows: Vec<&BinaryReport> = Vec::new();
    match &r.evaluation {
        EvaluationReport::Binary(b) => binary_rows.push(b),
        EvaluationReport::Multiclass(m) => {
            md.push_str(&format!("Accuracy {:.4}\n\n| true \\ predicted | {} |\n|---|{}\n", m.accuracy, m.classes.join(" | "), "---|".repeat(m.classes.len())));
            for (name, row) in m.classes.iter().zip(&m.confusion) {
                let cells: Vec<String> = row.iter().map(u64::to_string).collect();
                md.push_str(&format!("| {name} | {} |\n", cells.join(" | ")));
            }
            md.push('\n');
        }
    }
    if let Some(b) = &r.baseline {
        binary_rows.extend(&b.rows);
    }
    if !binary_rows.is_empty() {
        md.push_str("| classifier | TP | FP | FN | TN | accuracy | sensitivity | specificity | F-score | MCC | ROC-AUC | PR-AUC |\n");
        md.push_str("|---|---|---|---|---|---|---|---|---|---|---|---|\n");
        for b in binary_rows {
            let (c, m) = (&b.confusion, &b.metrics);
            md.push_str(&format!(
                "| {} | {} | {} | {} | {} | {:.3} | {:.3} | {:.3} | {:.3} | {:.3} | {:.3} | {:.3} |\n",
                b.classifier, c.tp, c.fp, c.fn_, c.tn, m.accuracy, m.sensitivity, m.specificity, m.f_score, m.mcc, b.roc_auc, b.pr_auc
            ));
        }
        md.push('\n');
    }
    md.push_str("## Trust\n\n| class | samples | trust spectrum |\n|---|---|---|\n");
    for c in &r.trust.classes {
        md.push_str(&format!("| {} | {} | {:.4} |\n", c.class, c.count, c.spectrum));
    }
    md.push_str(&format!("\nNetTrustScore {:.4}\n\n## Saliency\n\n| class | samples | integrated depth-profile mean |\n|---|---|---|\n", r.trust.net_trust_score));
    for c in &r.explain.classes {
        md.push_str(&format!("| {} | {} | {:.4} |\n", c.class, c.samples, c.integrated_mean));
    }
    md
}

/// Runs train, evaluate, baseline (binary task only), trust and explain,
/// then writes `report.json` and `report.md`.
pub fn cmd_report(run: &Run, data: &RunData) -> Result<FullReport> {
    let train = cmd_train(run, data)?;
    let evaluation = cmd_evaluate(run, data)?;
    let baseline = match run.cfg.task {
        TaskMode::Binary => Some(cmd_baseline(run, data)?),
        TaskMode::Multiclass => None,
    };
    let trust = cmd_trust(run)?;
    let explain = cmd_explain(run, data)?;
    let report = FullReport { train, evaluation, baseline, trust, explain };
    run.json(&run.layout.root.join("report.json"), "burnnet.report/1", &report)?;
    write_text(&run.layout.root.join("report.md"), &report_markdown(run, &report))?;
    Ok(report)
}
