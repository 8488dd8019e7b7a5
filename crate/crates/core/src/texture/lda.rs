use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{FEATURE_NAMES, NUM_FEATURES};
use crate::error::{Error, Result};

fn feature_label(i: usize, dims: usize) -> String {
    if dims == NUM_FEATURES {
        FEATURE_NAMES[i].to_string()
    } else {
        format!("feature {i}")
    }
}

fn check_matrix(x: &[Vec<f64>]) -> Result<usize> {
    let dims = x.first().map(Vec::len).unwrap_or(0);
    if dims == 0 {
        return Err(Error::InvalidArgument("feature matrix is empty".into()));
    }
    if let Some(bad) = x.iter().position(|r| r.len() != dims) {
        return Err(Error::shape(&[dims], &[x[bad].len()]));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("feature matrix contains non-finite values".into()));
    }
    Ok(dims)
}

/// Per-feature z-scoring with population statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Fails, naming the offenders, when a feature is constant.
    pub fn fit(x: &[Vec<f64>]) -> Result<Self> {
        let dims = check_matrix(x)?;
        let n = x.len() as f64;
        let mean: Vec<f64> = (0..dims).map(|d| x.iter().map(|r| r[d]).sum::<f64>() / n).collect();
        let scale: Vec<f64> = (0..dims)
            .map(|d| (x.iter().map(|r| (r[d] - mean[d]).powi(2)).sum::<f64>() / n).sqrt())
            .collect();
        let constant: Vec<String> = (0..dims)
            .filter(|&d| !(scale[d] > 1e-12 * mean[d].abs().max(1.0)))
            .map(|d| feature_label(d, dims))
            .collect();
        if !constant.is_empty() {
            return Err(Error::Numerical(format!(
                "constant features cannot be standardized: {}",
                constant.join(", ")
            )));
        }
        Ok(Standardizer { mean, scale })
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.mean.len() {
            return Err(Error::shape(&[self.mean.len()], &[x.len()]));
        }
        Ok(x.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect())
    }
}

/// Fisher discriminant on standardized features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub standardizer: Standardizer,
    pub weights: Vec<f64>,
    pub threshold: f64,
}

impl LdaModel {
    /// Signed score; positive means the positive class.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        let z = self.standardizer.transform(x)?;
        Ok(z.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>() - self.threshold)
    }

    pub fn predict(&self, x: &[f64]) -> Result<bool> {
        Ok(self.score(x)? > 0.0)
    }
}

/// Fits `w = (S_w + eps I)^-1 (mu_pos - mu_neg)` with
/// `eps = 1e-6 * trace(S_w) / dims`, where `S_w` is the pooled within-class
/// scatter. The threshold is the projection of the midpoint of the class means.
pub fn lda_fit(x: &[Vec<f64>], y: &[bool]) -> Result<LdaModel> {
    if x.len() != y.len() {
        return Err(Error::shape(&[x.len()], &[y.len()]));
    }
    let n_pos = y.iter().filter(|&&v| v).count();
    let n_neg = y.len() - n_pos;
    if n_pos < 2 || n_neg < 2 {
        return Err(Error::Data(format!(
            "LDA needs at least 2 samples per class, got {n_pos} positive and {n_neg} negative"
        )));
    }
    let standardizer = Standardizer::fit(x)?;
    let dims = standardizer.mean.len();
    let z: Vec<DVector<f64>> = x
        .iter()
        .map(|r| standardizer.transform(r).map(DVector::from_vec))
        .collect::<Result<_>>()?;
    let class_mean = |label: bool, count: usize| {
        z.iter()
            .zip(y)
            .filter(|(_, &l)| l == label)
            .fold(DVector::zeros(dims), |acc, (v, _)| acc + v)
            / count as f64
    };
    let mu_pos = class_mean(true, n_pos);
    let mu_neg = class_mean(false, n_neg);
    let mut sw = DMatrix::<f64>::zeros(dims, dims);
    for (v, &l) in z.iter().zip(y) {
        let d = v - if l { &mu_pos } else { &mu_neg };
        sw.ger(1.0, &d, &d, 1.0);
    }
    let eps = 1e-6 * sw.trace() / dims as f64;
    for i in 0..dims {
        sw[(i, i)] += eps;
    }
    let diff = &mu_pos - &mu_neg;
    let chol = sw.cholesky().ok_or_else(|| {
        Error::Numerical("within-class scatter is singular after ridge regularization".into())
    })?;
    let w = chol.solve(&diff);
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("LDA weights are not finite".into()));
    }
    let threshold = w.dot(&((&mu_pos + &mu_neg) * 0.5));
    Ok(LdaModel {
        standardizer,
        weights: w.iter().copied().collect(),
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn blobs(n: usize, sep: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<bool>) {
        let mut rng = Rng::new(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..2 * n {
            let pos = i % 2 == 0;
            let shift = if pos { sep } else { -sep };
            x.push(vec![rng.normal() + shift, rng.normal() - shift, rng.normal()]);
            y.push(pos);
        }
        (x, y)
    }

    fn accuracy(m: &LdaModel, x: &[Vec<f64>], y: &[bool]) -> f64 {
        x.iter().zip(y).filter(|(r, &l)| m.predict(r).unwrap() == l).count() as f64 / y.len() as f64
    }

    #[test]
    fn separated_blobs() {
        let (x, y) = blobs(50, 4.0, 1);
        let m = lda_fit(&x, &y).unwrap();
        assert_eq!(accuracy(&m, &x, &y), 1.0);
        assert!(m.weights.iter().any(|w| *w != 0.0));
    }

    #[test]
    fn no_signal_gives_zero_scores() {
        let x: Vec<Vec<f64>> = (0..8).map(|i| vec![(i / 2) as f64, ((i / 2) % 2) as f64 * 3.0]).collect();
        let y: Vec<bool> = (0..8).map(|i| i % 2 == 0).collect();
        let m = lda_fit(&x, &y).unwrap();
        for r in &x {
            assert!(m.score(r).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn affine_rescaling_keeps_labels() {
        let (x, y) = blobs(30, 0.7, 2);
        let m = lda_fit(&x, &y).unwrap();
        let scaled: Vec<Vec<f64>> = x.iter().map(|r| vec![r[0] * 1e3 + 7.0, r[1], -0.01 * r[2] + 2.0]).collect();
        let ms = lda_fit(&scaled, &y).unwrap();
        for (a, b) in x.iter().zip(&scaled) {
            assert_eq!(m.predict(a).unwrap(), ms.predict(b).unwrap());
            assert!((m.score(a).unwrap().abs() - ms.score(b).unwrap().abs()).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_features_are_named() {
        let x: Vec<Vec<f64>> = (0..6).map(|i| {
            let mut r = vec![i as f64; NUM_FEATURES];
            r[2] = 1.0;
            r[17] = 0.5;
            r
        }).collect();
        let y = vec![true, false, true, false, true, false];
        let err = lda_fit(&x, &y).unwrap_err().to_string();
        assert!(err.contains("correlation") && err.contains("max_probability"), "{err}");
    }

    #[test]
    fn too_few_samples() {
        let x = vec![vec![1.0], vec![2.0], vec![3.0]];
        assert!(lda_fit(&x, &[true, false, false]).is_err());
    }
}
