use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary confusion counts. "Positive" is the class of interest (deep
/// partial thickness in the binary task).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryConfusion {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl BinaryConfusion {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        BinaryConfusion { tp, fp, fn_, tn }
    }

    pub fn from_predictions(truth: &[bool], predicted: &[bool]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::shape(&[truth.len()], &[predicted.len()]));
        }
        let mut cm = BinaryConfusion::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t, p) {
                (true, true) => cm.tp += 1,
                (false, true) => cm.fp += 1,
                (true, false) => cm.fn_ += 1,
                (false, false) => cm.tn += 1,
            }
        }
        Ok(cm)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn merge(&self, other: &BinaryConfusion) -> BinaryConfusion {
        BinaryConfusion::new(
            self.tp + other.tp,
            self.fp + other.fp,
            self.fn_ + other.fn_,
            self.tn + other.tn,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryMetrics {
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub f_score: f64,
    pub mcc: f64,
}

/// Accuracy, sensitivity, specificity, F1 and Matthews correlation. MCC is
/// 0 when any marginal is empty.
pub fn classification_metrics(cm: &BinaryConfusion) -> Result<BinaryMetrics> {
    let BinaryConfusion { tp, fp, fn_, tn } = *cm;
    if cm.total() == 0 {
        return Err(Error::InvalidArgument("confusion matrix is empty".into()));
    }
    if tp + fn_ == 0 || tn + fp == 0 {
        return Err(Error::InvalidArgument(format!(
            "sensitivity and specificity need both actual classes, got {} positive and {} negative",
            tp + fn_,
            tn + fp
        )));
    }
    let (tp, fp, fn_, tn) = (tp as f64, fp as f64, fn_ as f64, tn as f64);
    let denom = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    Ok(BinaryMetrics {
        accuracy: (tp + tn) / (tp + fp + fn_ + tn),
        sensitivity: tp / (tp + fn_),
        specificity: tn / (tn + fp),
        f_score: 2.0 * tp / (2.0 * tp + fp + fn_),
        mcc: if denom == 0.0 { 0.0 } else { (tp * tn - fp * fn_) / denom.sqrt() },
    })
}

/// k×k counts; rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    k: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn zeros(k: usize) -> Self {
        ConfusionMatrix { k, counts: vec![0; k * k] }
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let k = rows.len();
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidArgument("confusion matrix must be square".into()));
        }
        Ok(ConfusionMatrix { k, counts: rows.concat() })
    }

    pub fn from_predictions(k: usize, truth: &[usize], predicted: &[usize]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::shape(&[truth.len()], &[predicted.len()]));
        }
        let mut cm = ConfusionMatrix::zeros(k);
        for (&t, &p) in truth.iter().zip(predicted) {
            if t >= k || p >= k {
                return Err(Error::InvalidArgument(format!("class index out of range for {k} classes: ({t}, {p})")));
            }
            cm.counts[t * k + p] += 1;
        }
        Ok(cm)
    }

    pub fn classes(&self) -> usize {
        self.k
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.k + predicted]
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.counts.chunks(self.k.max(1)).map(<[u64]>::to_vec).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.k).map(|i| self.get(i, i)).sum()
    }
}

pub fn multiclass_accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    match cm.total() {
        0 => Err(Error::InvalidArgument("confusion matrix is empty".into())),
        n => Ok(cm.trace() as f64 / n as f64),
    }
}
