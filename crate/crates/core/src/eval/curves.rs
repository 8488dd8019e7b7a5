use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A monotone operating-point curve. `points[i]` is reached by predicting
/// positive for every score `>= thresholds[i]`; the first point uses an
/// infinite threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    /// ROC: (false-positive rate, true-positive rate). PR: (recall, precision).
    pub points: Vec<(f64, f64)>,
    pub thresholds: Vec<f64>,
    pub auc: f64,
}

impl Curve {
    /// CSV with columns `threshold,<x_name>,<y_name>`.
    pub fn to_csv(&self, x_name: &str, y_name: &str) -> String {
        let mut out = format!("threshold,{x_name},{y_name}\n");
        for (t, (x, y)) in self.thresholds.iter().zip(&self.points) {
            out.push_str(&format!("{t},{x},{y}\n"));
        }
        out
    }
}

/// Cumulative (tp, fp) after each group of tied scores, in descending score order.
fn sweep(scores: &[f64], labels: &[bool]) -> Result<(Vec<(u64, u64)>, Vec<f64>, u64, u64)> {
    if scores.len() != labels.len() {
        return Err(Error::shape(&[labels.len()], &[scores.len()]));
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::Numerical(format!("score {i} is not finite")));
    }
    let pos = labels.iter().filter(|&&l| l).count() as u64;
    let neg = labels.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::InvalidArgument(format!(
            "curves need both classes, got {pos} positive and {neg} negative labels"
        )));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut counts = vec![(0, 0)];
    let mut thresholds = vec![f64::INFINITY];
    let (mut tp, mut fp) = (0, 0);
    for (k, &i) in order.iter().enumerate() {
        if labels[i] {
            tp += 1;
        } else {
            fp += 1;
        }
        let last_of_group = order.get(k + 1).is_none_or(|&j| scores[j] != scores[i]);
        if last_of_group {
            counts.push((tp, fp));
            thresholds.push(scores[i]);
        }
    }
    Ok((counts, thresholds, pos, neg))
}

fn trapezoid(points: &[(f64, f64)]) -> f64 {
    points.windows(2).map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0).sum()
}

/// ROC curve with trapezoidal area; ties form a single diagonal step, so the
/// area equals the Mann-Whitney statistic with ties counted one half.
pub fn roc_curve(scores: &[f64], labels: &[bool]) -> Result<Curve> {
    let (counts, thresholds, pos, neg) = sweep(scores, labels)?;
    let points: Vec<(f64, f64)> = counts
        .iter()
        .map(|&(tp, fp)| (fp as f64 / neg as f64, tp as f64 / pos as f64))
        .collect();
    Ok(Curve { auc: trapezoid(&points), points, thresholds })
}

/// Precision-recall curve starting at (0, 1), with trapezoidal area over recall.
pub fn pr_curve(scores: &[f64], labels: &[bool]) -> Result<Curve> {
    let (counts, thresholds, pos, _) = sweep(scores, labels)?;
    let points: Vec<(f64, f64)> = counts
        .iter()
        .map(|&(tp, fp)| {
            let precision = if tp + fp == 0 { 1.0 } else { tp as f64 / (tp + fp) as f64 };
            (tp as f64 / pos as f64, precision)
        })
        .collect();
    Ok(Curve { auc: trapezoid(&points), points, thresholds })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_ranking() {
        let s = [0.9, 0.8, 0.4, 0.2];
        let l = [true, true, false, false];
        assert_eq!(roc_curve(&s, &l).unwrap().auc, 1.0);
        assert_eq!(pr_curve(&s, &l).unwrap().auc, 1.0);
    }

    #[test]
    fn all_ties_is_chance() {
        let roc = roc_curve(&[0.3; 6], &[true, false, true, false, false, true]).unwrap();
        assert_eq!(roc.auc, 0.5);
        assert_eq!(roc.points, vec![(0.0, 0.0), (1.0, 1.0)]);
    }

    #[test]
    fn inverted_ranking() {
        let roc = roc_curve(&[0.1, 0.2, 0.8, 0.9], &[true, true, false, false]).unwrap();
        assert_eq!(roc.auc, 0.0);
    }

    #[test]
    fn pr_points() {
        let pr = pr_curve(&[0.9, 0.7, 0.5], &[true, false, true]).unwrap();
        assert_eq!(pr.points, vec![(0.0, 1.0), (0.5, 1.0), (0.5, 0.5), (1.0, 2.0 / 3.0)]);
        assert!((pr.auc - (0.5 + 0.5 * (0.5 + 2.0 / 3.0) / 2.0)).abs() < 1e-15);
        assert!(pr.to_csv("recall", "precision").starts_with("threshold,recall,precision\ninf,0,1\n"));
    }

    #[test]
    fn rejects_single_class_and_nan() {
        assert!(roc_curve(&[0.1, 0.2], &[true, true]).is_err());
        assert!(pr_curve(&[0.1, f64::NAN], &[true, false]).is_err());
        assert!(roc_curve(&[0.1], &[true, false]).is_err());
    }
}
