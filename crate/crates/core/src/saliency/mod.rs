//! Guided backpropagation, Grad-CAM++ and their product, plus class-averaged
//! heatmaps and depth profiles.

mod explain;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::io::write_gray_png;
use crate::error::{Error, Result};

pub use explain::{
    gradcam_pp, gradcam_pp_net, guided_backprop, guided_backprop_net, guided_gradcam_pp, resize_bilinear,
    ScoreTarget,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    Raw,
    /// Min-max scaled to [0, 1].
    Unit,
}

/// Non-negative saliency map aligned with an input image (rows = depth).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Heatmap {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    normalization: Normalization,
}

impl Heatmap {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>, normalization: Normalization) -> Result<Self> {
        if rows == 0 || cols == 0 || values.len() != rows * cols {
            return Err(Error::shape(&[rows, cols], &[values.len()]));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Numerical(format!("heatmap value {v} is not a finite non-negative number")));
        }
        if normalization == Normalization::Unit && values.iter().any(|&v| v > 1.0) {
            return Err(Error::InvalidArgument("unit-normalized heatmap exceeds 1".into()));
        }
        Ok(Heatmap { rows, cols, values, normalization })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    /// Min-max scaling; a constant map becomes all zeros.
    pub fn unit_normalized(&self) -> Heatmap {
        let lo = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let values = if hi > lo {
            self.values.iter().map(|v| ((v - lo) / (hi - lo)).clamp(0.0, 1.0)).collect()
        } else {
            vec![0.0; self.values.len()]
        };
        Heatmap { values, normalization: Normalization::Unit, ..*self }
    }

    /// Pixelwise product of two maps of equal size.
    pub fn product(&self, other: &Heatmap) -> Result<Heatmap> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::shape(&[self.rows, self.cols], &[other.rows, other.cols]));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Heatmap::new(self.rows, self.cols, values, Normalization::Raw)
    }

    /// One line per row, comma-separated values.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.values.chunks(self.cols) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// 8-bit grayscale raster; raw maps are min-max scaled first.
    pub fn write_png(&self, path: &Path) -> Result<()> {
        let unit = match self.normalization {
            Normalization::Unit => self.clone(),
            Normalization::Raw => self.unit_normalized(),
        };
        write_gray_png(path, self.rows, self.cols, &unit.values)
    }
}

/// Pixelwise mean of the maps, then min-max normalization.
pub fn class_average_heatmap(maps: &[Heatmap]) -> Result<Heatmap> {
    let first = maps
        .first()
        .ok_or_else(|| Error::InvalidArgument("class average of no heatmaps".into()))?;
    let mut sum = vec![0.0; first.values.len()];
    for m in maps {
        if (m.rows, m.cols) != (first.rows, first.cols) {
            return Err(Error::shape(&[first.rows, first.cols], &[m.rows, m.cols]));
        }
        for (s, v) in sum.iter_mut().zip(&m.values) {
            *s += v;
        }
    }
    let n = maps.len() as f64;
    let mean = Heatmap::new(first.rows, first.cols, sum.iter().map(|s| s / n).collect(), Normalization::Raw)?;
    Ok(mean.unit_normalized())
}

/// Per depth row: mean and population standard deviation across the lateral axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthProfile {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl DepthProfile {
    /// Mean of the row means, i.e. the mean heatmap intensity.
    pub fn integrated_mean(&self) -> f64 {
        self.mean.iter().sum::<f64>() / self.mean.len() as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,mean,std\n");
        for (r, (m, s)) in self.mean.iter().zip(&self.std).enumerate() {
            out.push_str(&format!("{r},{m},{s}\n"));
        }
        out
    }
}

pub fn depth_profile(map: &Heatmap) -> DepthProfile {
    let n = map.cols as f64;
    let (mean, std) = map
        .values
        .chunks(map.cols)
        .map(|row| {
            let m = row.iter().sum::<f64>() / n;
            let var = row.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
            (m, var.sqrt())
        })
        .unzip();
    DepthProfile { mean, std }
}
