//! Metrics, curves and trust values against independent reference computations.

use std::f64::consts::PI;

use burnnet::eval::{
    classification_metrics, multiclass_accuracy, net_trust_score, qa_trust, roc_curve, trust_density,
    BinaryConfusion, ConfusionMatrix, TrustConfig, TrustRecord,
};
use burnnet::Rng;
use proptest::prelude::*;

/// Pearson correlation of the expanded truth and prediction indicator vectors.
fn phi(truth: &[f64], pred: &[f64]) -> f64 {
    let n = truth.len() as f64;
    let (mt, mp) = (truth.iter().sum::<f64>() / n, pred.iter().sum::<f64>() / n);
    let cov: f64 = truth.iter().zip(pred).map(|(a, b)| (a - mt) * (b - mp)).sum();
    let vt: f64 = truth.iter().map(|a| (a - mt).powi(2)).sum();
    let vp: f64 = pred.iter().map(|b| (b - mp).powi(2)).sum();
    if vt == 0.0 || vp == 0.0 { 0.0 } else { cov / (vt * vp).sqrt() }
}

fn expand(tp: u64, fp: u64, fn_: u64, tn: u64) -> (Vec<bool>, Vec<bool>) {
    let mut truth = Vec::new();
    let mut pred = Vec::new();
    for (t, p, count) in [(true, true, tp), (false, true, fp), (true, false, fn_), (false, false, tn)] {
        truth.extend(std::iter::repeat_n(t, count as usize));
        pred.extend(std::iter::repeat_n(p, count as usize));
    }
    (truth, pred)
}

/// Mann-Whitney statistic: P(score_pos > score_neg) + P(tie) / 2.
fn pairwise_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &li) in labels.iter().enumerate() {
        for (j, &lj) in labels.iter().enumerate() {
            if li && !lj {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

fn random_scored_set(rng: &mut Rng, n: usize) -> (Vec<f64>, Vec<bool>) {
    let mut labels: Vec<bool> = (0..n).map(|_| rng.uniform() < 0.4).collect();
    labels[0] = true;
    labels[1] = false;
    // Coarse rounding forces ties.
    let scores = labels
        .iter()
        .map(|&l| ((rng.normal() + if l { 0.8 } else { 0.0 }) * 4.0).round() / 4.0)
        .collect();
    (scores, labels)
}

#[test]
fn trapezoid_auc_equals_pairwise_statistic() {
    let mut rng = Rng::new(11);
    for _ in 0..100 {
        let (scores, labels) = random_scored_set(&mut rng, 30);
        let auc = roc_curve(&scores, &labels).unwrap().auc;
        assert!((auc - pairwise_auc(&scores, &labels)).abs() < 1e-12);
    }
}

#[test]
fn negated_scores_give_complementary_auc() {
    let mut rng = Rng::new(12);
    for _ in 0..50 {
        let (scores, labels) = random_scored_set(&mut rng, 25);
        let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
        let a = roc_curve(&scores, &labels).unwrap().auc;
        let b = roc_curve(&neg, &labels).unwrap().auc;
        assert!((a + b - 1.0).abs() < 1e-12);
    }
}

fn direct_density(trusts: &[f64], gamma: f64, at: f64) -> f64 {
    let n = trusts.len() as f64;
    let sigma = gamma / n.sqrt();
    let mut total = 0.0;
    for q in trusts {
        let z = (q - at) / sigma;
        total += (-0.5 * z * z).exp() / (gamma * (2.0 * PI).sqrt());
    }
    total / n
}

#[test]
fn density_matches_direct_sum() {
    let mut rng = Rng::new(13);
    for k in 0..100 {
        let n = 1 + k % 40;
        let trusts: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
        let gamma = rng.uniform_range(0.05, 1.0);
        let cfg = TrustConfig { gamma, ..TrustConfig::default() };
        let curve = trust_density(&trusts, &cfg).unwrap();
        assert_eq!(curve.x.len(), 201);
        for (x, rho) in curve.x.iter().zip(&curve.rho) {
            assert!((rho - direct_density(&trusts, gamma, *x)).abs() < 1e-12);
        }
    }
}

#[test]
fn two_point_density_at_the_midpoint() {
    let cfg = TrustConfig::default();
    let curve = trust_density(&[0.0, 1.0], &cfg).unwrap();
    assert_eq!(curve.x[100], 0.5);
    assert!((curve.rho[100] - 0.293_525_326_347_479_85).abs() < 1e-12);
    assert!((curve.rho[100] - 0.29355).abs() < 5e-5);
}

#[test]
fn multiclass_accuracy_is_the_diagonal_share() {
    let cm = ConfusionMatrix::from_rows(&[
        vec![76, 2, 1, 1],
        vec![1, 77, 1, 1],
        vec![2, 1, 75, 2],
        vec![1, 1, 2, 76],
    ])
    .unwrap();
    assert_eq!(cm.trace(), 304);
    assert_eq!(cm.total(), 320);
    assert!((multiclass_accuracy(&cm).unwrap() - 0.95).abs() < 1e-15);
}

proptest! {
    #[test]
    fn metrics_match_expanded_labels(tp in 0u64..60, fp in 0u64..60, fn_ in 0u64..60, tn in 0u64..60) {
        prop_assume!(tp + fn_ > 0 && tn + fp > 0);
        let m = classification_metrics(&BinaryConfusion::new(tp, fp, fn_, tn)).unwrap();
        let (truth, pred) = expand(tp, fp, fn_, tn);
        let n = truth.len() as f64;
        let agree = truth.iter().zip(&pred).filter(|(a, b)| a == b).count() as f64;
        prop_assert!((m.accuracy - agree / n).abs() < 1e-12);
        let hits = |label: bool| truth.iter().zip(&pred).filter(|(t, p)| **t == label && **p == label).count() as f64;
        let count = |label: bool| truth.iter().filter(|t| **t == label).count() as f64;
        prop_assert!((m.sensitivity - hits(true) / count(true)).abs() < 1e-12);
        prop_assert!((m.specificity - hits(false) / count(false)).abs() < 1e-12);
        let predicted_pos = pred.iter().filter(|p| **p).count() as f64;
        let f = if predicted_pos + count(true) == 0.0 { 0.0 } else {
            2.0 * hits(true) / (predicted_pos + count(true))
        };
        prop_assert!((m.f_score - f).abs() < 1e-12);
        let as_f64 = |v: &[bool]| v.iter().map(|&b| b as u8 as f64).collect::<Vec<_>>();
        prop_assert!((m.mcc - phi(&as_f64(&truth), &as_f64(&pred))).abs() < 1e-9);
    }

    #[test]
    fn trust_is_a_unit_interval_value(conf in 0.0f64..=1.0, pred in 0usize..4, truth in 0usize..4,
                                      alpha in 0.1f64..4.0, beta in 0.1f64..4.0) {
        let cfg = TrustConfig { alpha, beta, ..TrustConfig::default() };
        let q = qa_trust(&TrustRecord::new(conf, pred, truth).unwrap(), &cfg);
        prop_assert!((0.0..=1.0).contains(&q));
    }

    #[test]
    fn density_is_non_negative(trusts in prop::collection::vec(0.0f64..=1.0, 1..30), gamma in 0.01f64..2.0) {
        let curve = trust_density(&trusts, &TrustConfig { gamma, ..TrustConfig::default() }).unwrap();
        prop_assert!(curve.rho.iter().all(|&r| r >= 0.0 && r.is_finite()));
    }

    #[test]
    fn net_trust_lies_between_extreme_spectra(spectra in prop::collection::vec(0.0f64..=1.0, 1..6)) {
        let s = net_trust_score(&spectra).unwrap();
        let lo = spectra.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = spectra.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(s >= lo - 1e-15 && s <= hi + 1e-15);
    }
}
