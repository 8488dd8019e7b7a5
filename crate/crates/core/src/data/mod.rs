//! Images, labels, datasets, and the synthetic speckle phantoms that stand in
//! for acquired scans.

pub mod folds;
pub mod io;
pub mod phantom;
pub mod preprocess;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub use folds::{kfold_split, Fold};
pub use io::{load_image_dir, write_snapshot, Manifest};
pub use phantom::{generate_dataset, generate_phantom, PhantomParams};
pub use preprocess::{augment, downsample, hflip};

/// Tissue condition, ordered by severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BurnClass {
    Unburned,
    /// Superficial partial-thickness.
    SP,
    /// Deep partial-thickness.
    DP,
    /// Light full-thickness.
    LFT,
    /// Deep full-thickness.
    DFT,
}

impl BurnClass {
    pub const ALL: [BurnClass; 5] = [
        BurnClass::Unburned,
        BurnClass::SP,
        BurnClass::DP,
        BurnClass::LFT,
        BurnClass::DFT,
    ];

    pub const BURNS: [BurnClass; 4] = [BurnClass::SP, BurnClass::DP, BurnClass::LFT, BurnClass::DFT];

    pub fn severity(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BurnClass::Unburned => "Unburned",
            BurnClass::SP => "SP",
            BurnClass::DP => "DP",
            BurnClass::LFT => "LFT",
            BurnClass::DFT => "DFT",
        }
    }
}

impl fmt::Display for BurnClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BurnClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BurnClass::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Data(format!("unknown burn class '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Synthetic { seed: u64, class: BurnClass, index: usize },
    File(std::path::PathBuf),
    Derived(String),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Synthetic { seed, class, index } => {
                write!(f, "synthetic:{class}:{index}:{seed}")
            }
            Provenance::File(p) => write!(f, "file:{}", p.display()),
            Provenance::Derived(s) => write!(f, "derived:{s}"),
        }
    }
}

/// Single-channel image; rows run along depth, columns along the lateral axis.
#[derive(Debug, Clone, PartialEq)]
pub struct UltrasoundImage {
    rows: usize,
    cols: usize,
    pixels: Vec<f64>,
    pub provenance: Provenance,
}

impl UltrasoundImage {
    pub fn new(rows: usize, cols: usize, pixels: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!("empty image {rows}x{cols}")));
        }
        if pixels.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "{rows}x{cols} image needs {} pixels, got {}",
                rows * cols,
                pixels.len()
            )));
        }
        if let Some(bad) = pixels.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Data(format!("pixel value {bad} outside [0, 1]")));
        }
        Ok(UltrasoundImage {
            rows,
            cols,
            pixels,
            provenance,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.pixels[r * self.cols + c]
    }

    /// `[1, rows, cols]` network input.
    pub fn to_tensor(&self) -> Tensor {
        Tensor::new(vec![1, self.rows, self.cols], self.pixels.clone())
            .expect("image dims are positive")
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledDataset {
    pub name: String,
    pub items: Vec<(UltrasoundImage, BurnClass)>,
}

impl LabeledDataset {
    pub fn new(name: impl Into<String>, items: Vec<(UltrasoundImage, BurnClass)>) -> Result<Self> {
        let ds = LabeledDataset {
            name: name.into(),
            items,
        };
        ds.check_dims()?;
        Ok(ds)
    }

    fn check_dims(&self) -> Result<()> {
        let Some((first, _)) = self.items.first() else {
            return Ok(());
        };
        let dims = first.dims();
        let odd: Vec<String> = self
            .items
            .iter()
            .filter(|(img, _)| img.dims() != dims)
            .map(|(img, _)| format!("{} ({}x{})", img.provenance, img.rows, img.cols))
            .collect();
        if !odd.is_empty() {
            return Err(Error::Data(format!(
                "images differ from {}x{}: {}",
                dims.0,
                dims.1,
                odd.join(", ")
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn dims(&self) -> Option<(usize, usize)> {
        self.items.first().map(|(img, _)| img.dims())
    }

    pub fn labels(&self) -> Vec<BurnClass> {
        self.items.iter().map(|(_, c)| *c).collect()
    }

    pub fn class_counts(&self) -> Vec<(BurnClass, usize)> {
        BurnClass::ALL
            .into_iter()
            .map(|c| (c, self.items.iter().filter(|(_, l)| *l == c).count()))
            .filter(|(_, n)| *n > 0)
            .collect()
    }

    pub fn of_class(&self, class: BurnClass) -> Vec<&UltrasoundImage> {
        self.items
            .iter()
            .filter(|(_, c)| *c == class)
            .map(|(img, _)| img)
            .collect()
    }

    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            name: self.name.clone(),
            items: indices.iter().map(|&i| self.items[i].clone()).collect(),
        }
    }

    pub fn filter_classes(&self, classes: &[BurnClass]) -> LabeledDataset {
        LabeledDataset {
            name: self.name.clone(),
            items: self
                .items
                .iter()
                .filter(|(_, c)| classes.contains(c))
                .cloned()
                .collect(),
        }
    }

    pub fn map_images(
        &self,
        f: impl Fn(&UltrasoundImage) -> Result<UltrasoundImage>,
    ) -> Result<LabeledDataset> {
        let items = self
            .items
            .iter()
            .map(|(img, c)| Ok((f(img)?, *c)))
            .collect::<Result<Vec<_>>>()?;
        LabeledDataset::new(self.name.clone(), items)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img(rows: usize, cols: usize) -> UltrasoundImage {
        UltrasoundImage::new(rows, cols, vec![0.5; rows * cols], Provenance::Derived("t".into()))
            .unwrap()
    }

    #[test]
    fn class_parsing() {
        for c in BurnClass::ALL {
            assert_eq!(c.as_str().parse::<BurnClass>().unwrap(), c);
        }
        assert_eq!("dft".parse::<BurnClass>().unwrap(), BurnClass::DFT);
        assert!("XYZ".parse::<BurnClass>().is_err());
        assert!(BurnClass::SP < BurnClass::DP && BurnClass::LFT < BurnClass::DFT);
    }

    #[test]
    fn image_validation() {
        assert!(UltrasoundImage::new(2, 2, vec![0.0, 1.0, 0.5, 1.5], Provenance::Derived("x".into())).is_err());
        assert!(UltrasoundImage::new(2, 2, vec![0.0; 3], Provenance::Derived("x".into())).is_err());
        assert!(UltrasoundImage::new(0, 2, vec![], Provenance::Derived("x".into())).is_err());
    }

    #[test]
    fn dataset_rejects_mixed_dims() {
        let err = LabeledDataset::new(
            "mixed",
            vec![(img(2, 3), BurnClass::SP), (img(3, 3), BurnClass::DP)],
        );
        assert!(matches!(err, Err(Error::Data(_))));
        let ok = LabeledDataset::new(
            "ok",
            vec![(img(2, 3), BurnClass::SP), (img(2, 3), BurnClass::SP), (img(2, 3), BurnClass::DP)],
        )
        .unwrap();
        assert_eq!(ok.class_counts(), vec![(BurnClass::SP, 2), (BurnClass::DP, 1)]);
    }
}
