//! Engineered-texture baselines: grey-level co-occurrence matrices, Haralick
//! statistics, and two linear/kernel classifiers over them.

mod lda;
mod svm;

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::data::{BurnClass, LabeledDataset, UltrasoundImage};
use crate::error::{Error, Result};

pub use lda::{lda_fit, LdaModel, Standardizer};
pub use svm::{svm_rbf_fit, SvmModel, SvmParams};

pub const DEFAULT_LEVELS: usize = 32;
/// `(row, col)` displacements: right, down, down-right, down-left.
pub const DEFAULT_OFFSETS: [(isize, isize); 4] = [(0, 1), (1, 0), (1, 1), (1, -1)];

pub const NUM_FEATURES: usize = 19;
pub const FEATURE_NAMES: [&str; NUM_FEATURES] = [
    "asm",
    "contrast",
    "correlation",
    "sum_of_squares_variance",
    "inverse_difference_moment",
    "sum_average",
    "sum_variance",
    "sum_entropy",
    "entropy",
    "difference_variance",
    "difference_entropy",
    "info_measure_correlation_1",
    "info_measure_correlation_2",
    "autocorrelation",
    "dissimilarity",
    "cluster_shade",
    "cluster_prominence",
    "max_probability",
    "inverse_difference",
];

/// Normalized symmetric co-occurrence matrix, row-major `levels x levels`.
#[derive(Debug, Clone, PartialEq)]
pub struct Glcm {
    levels: usize,
    matrix: Vec<f64>,
    offsets: Vec<(isize, isize)>,
}

impl Glcm {
    /// Wraps an existing probability matrix. Entries must be non-negative,
    /// symmetric, and sum to one.
    pub fn from_matrix(levels: usize, matrix: Vec<f64>) -> Result<Self> {
        if levels == 0 || matrix.len() != levels * levels {
            return Err(Error::shape(&[levels, levels], &[matrix.len()]));
        }
        if matrix.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument("GLCM entries must be finite and non-negative".into()));
        }
        let total: f64 = matrix.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("GLCM entries sum to {total}, not 1")));
        }
        for i in 0..levels {
            for j in 0..i {
                if (matrix[i * levels + j] - matrix[j * levels + i]).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!("GLCM is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Glcm {
            levels,
            matrix,
            offsets: Vec::new(),
        })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn offsets(&self) -> &[(isize, isize)] {
        &self.offsets
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.levels + j]
    }
}

/// Grey level of a pixel: `floor(p * levels)`, with 1.0 mapped to the top level.
pub fn quantize(p: f64, levels: usize) -> usize {
    ((p * levels as f64).floor() as usize).min(levels - 1)
}

/// Counts each displaced pixel pair in both orders, sums over `offsets`, and
/// normalizes.
pub fn compute_glcm(img: &UltrasoundImage, levels: usize, offsets: &[(isize, isize)]) -> Result<Glcm> {
    if levels < 2 {
        return Err(Error::InvalidArgument(format!("GLCM needs at least 2 levels, got {levels}")));
    }
    if offsets.is_empty() {
        return Err(Error::InvalidArgument("GLCM needs at least one offset".into()));
    }
    let (rows, cols) = img.dims();
    for &(dr, dc) in offsets {
        if dr.unsigned_abs() >= rows || dc.unsigned_abs() >= cols {
            return Err(Error::InvalidArgument(format!(
                "{rows}x{cols} image is too small for offset ({dr}, {dc})"
            )));
        }
    }
    let q: Vec<usize> = img.pixels().iter().map(|&p| quantize(p, levels)).collect();
    let mut counts = vec![0u64; levels * levels];
    for &(dr, dc) in offsets {
        let r_lo = (-dr).max(0) as usize;
        let r_hi = (rows as isize - dr.max(0)) as usize;
        let c_lo = (-dc).max(0) as usize;
        let c_hi = (cols as isize - dc.max(0)) as usize;
        for r in r_lo..r_hi {
            let r2 = (r as isize + dr) as usize;
            for c in c_lo..c_hi {
                let c2 = (c as isize + dc) as usize;
                let (a, b) = (q[r * cols + c], q[r2 * cols + c2]);
                counts[a * levels + b] += 1;
                counts[b * levels + a] += 1;
            }
        }
    }
    let total: u64 = counts.iter().sum();
    let matrix = counts.iter().map(|&n| n as f64 / total as f64).collect();
    Ok(Glcm {
        levels,
        matrix,
        offsets: offsets.to_vec(),
    })
}

/// The 19 statistics named by [`FEATURE_NAMES`], in that order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; NUM_FEATURES]);

impl FeatureVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        FEATURE_NAMES.iter().position(|n| *n == name).map(|i| self.0[i])
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.to_vec()
    }
}

fn entropy_term(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.ln()
    } else {
        0.0
    }
}

/// Haralick-style statistics with 0-based grey levels and natural logs.
/// Correlation and the first information measure are 0 when their
/// denominators vanish.
pub fn haralick_features(g: &Glcm) -> FeatureVector {
    let n = g.levels;
    let p = |i: usize, j: usize| g.matrix[i * n + j];

    let mut px = vec![0.0; n];
    let mut p_sum = vec![0.0; 2 * n - 1];
    let mut p_diff = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            let v = p(i, j);
            px[i] += v;
            p_sum[i + j] += v;
            p_diff[i.abs_diff(j)] += v;
        }
    }
    // Symmetric matrix: the column marginal equals the row marginal.
    let py = &px;
    let mu_x: f64 = px.iter().enumerate().map(|(i, v)| i as f64 * v).sum();
    let mu_y = mu_x;
    let var_x: f64 = px.iter().enumerate().map(|(i, v)| (i as f64 - mu_x).powi(2) * v).sum();
    let var_y = var_x;

    let (mut asm, mut contrast, mut ij, mut idm, mut entropy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut dissim, mut shade, mut prominence, mut max_p, mut inv_diff) = (0.0, 0.0, 0.0, 0.0f64, 0.0);
    let (mut hxy1, mut hxy2) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let v = p(i, j);
            let (fi, fj) = (i as f64, j as f64);
            let d = fi - fj;
            asm += v * v;
            contrast += d * d * v;
            ij += fi * fj * v;
            idm += v / (1.0 + d * d);
            entropy += entropy_term(v);
            dissim += d.abs() * v;
            let s = fi + fj - mu_x - mu_y;
            shade += s.powi(3) * v;
            prominence += s.powi(4) * v;
            max_p = max_p.max(v);
            inv_diff += v / (1.0 + d.abs());
            let m = px[i] * py[j];
            if m > 0.0 {
                hxy1 -= v * m.ln();
                hxy2 -= m * m.ln();
            }
        }
    }
    let correlation = if var_x > 0.0 && var_y > 0.0 {
        (ij - mu_x * mu_y) / (var_x * var_y).sqrt()
    } else {
        0.0
    };
    let sum_average: f64 = p_sum.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    let sum_variance: f64 = p_sum
        .iter()
        .enumerate()
        .map(|(k, v)| (k as f64 - sum_average).powi(2) * v)
        .sum();
    let sum_entropy: f64 = p_sum.iter().map(|&v| entropy_term(v)).sum();
    let diff_mean: f64 = p_diff.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    let diff_variance: f64 = p_diff
        .iter()
        .enumerate()
        .map(|(k, v)| (k as f64 - diff_mean).powi(2) * v)
        .sum();
    let diff_entropy: f64 = p_diff.iter().map(|&v| entropy_term(v)).sum();
    let hx: f64 = px.iter().map(|&v| entropy_term(v)).sum();
    let hy = hx;
    let imc1 = if hx.max(hy) > 0.0 {
        (entropy - hxy1) / hx.max(hy)
    } else {
        0.0
    };
    let imc2 = (1.0 - (-2.0 * (hxy2 - entropy)).exp()).max(0.0).sqrt();

    FeatureVector([
        asm,
        contrast,
        correlation,
        var_x,
        idm,
        sum_average,
        sum_variance,
        sum_entropy,
        entropy,
        diff_variance,
        diff_entropy,
        imc1,
        imc2,
        ij,
        dissim,
        shade,
        prominence,
        max_p,
        inv_diff,
    ])
}

/// Default-configuration features of one image.
pub fn extract_features(img: &UltrasoundImage) -> Result<FeatureVector> {
    Ok(haralick_features(&compute_glcm(img, DEFAULT_LEVELS, &DEFAULT_OFFSETS)?))
}

/// Features of every image, in dataset order.
pub fn extract_dataset(dataset: &LabeledDataset) -> Result<Vec<FeatureVector>> {
    dataset
        .items
        .par_iter()
        .map(|(img, _)| extract_features(img))
        .collect()
}

/// `class,<feature names...>` rows with round-trip float formatting.
pub fn features_to_csv(rows: &[(FeatureVector, BurnClass)]) -> String {
    let mut s = String::from("class");
    for name in FEATURE_NAMES {
        s.push(',');
        s.push_str(name);
    }
    s.push('\n');
    for (f, class) in rows {
        s.push_str(class.as_str());
        for v in f.0 {
            let _ = write!(s, ",{v:?}");
        }
        s.push('\n');
    }
    s
}

pub fn features_from_csv(text: &str) -> Result<Vec<(FeatureVector, BurnClass)>> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    let expected: Vec<&str> = std::iter::once("class").chain(FEATURE_NAMES).collect();
    if header.split(',').map(str::trim).ne(expected.iter().copied()) {
        return Err(Error::Data("feature CSV header does not match the 19 feature names".into()));
    }
    let mut out = Vec::new();
    for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != NUM_FEATURES + 1 {
            return Err(Error::Data(format!(
                "feature CSV row {} has {} fields, expected {}",
                n + 2,
                fields.len(),
                NUM_FEATURES + 1
            )));
        }
        let class: BurnClass = fields[0].parse()?;
        let mut f = [0.0; NUM_FEATURES];
        for (slot, field) in f.iter_mut().zip(&fields[1..]) {
            *slot = field.trim().parse().map_err(|_| {
                Error::Data(format!("feature CSV row {}: '{field}' is not a number", n + 2))
            })?;
        }
        out.push((FeatureVector(f), class));
    }
    Ok(out)
}
