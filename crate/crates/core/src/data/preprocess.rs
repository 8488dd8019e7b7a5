use super::{LabeledDataset, Provenance, UltrasoundImage};
use crate::error::{Error, Result};

/// Block-mean downsampling. Output extents are `ceil(extent / factor)`; edge
/// blocks that run past the image are averaged over the pixels they cover.
pub fn downsample(img: &UltrasoundImage, factor: usize) -> Result<UltrasoundImage> {
    if factor == 0 {
        return Err(Error::InvalidArgument("downsampling factor must be >= 1".into()));
    }
    if factor == 1 {
        return Ok(img.clone());
    }
    let (rows, cols) = img.dims();
    let out_rows = rows.div_ceil(factor);
    let out_cols = cols.div_ceil(factor);
    let mut out = Vec::with_capacity(out_rows * out_cols);
    for br in 0..out_rows {
        let r_range = br * factor..((br + 1) * factor).min(rows);
        for bc in 0..out_cols {
            let c_range = bc * factor..((bc + 1) * factor).min(cols);
            let mut sum = 0.0;
            for r in r_range.clone() {
                sum += img.pixels()[r * cols + c_range.start..r * cols + c_range.end]
                    .iter()
                    .sum::<f64>();
            }
            let n = r_range.len() * c_range.len();
            out.push((sum / n as f64).clamp(0.0, 1.0));
        }
    }
    UltrasoundImage::new(out_rows, out_cols, out, img.provenance.clone())
}

/// Mirror along the lateral (column) axis.
pub fn hflip(img: &UltrasoundImage) -> UltrasoundImage {
    let (rows, cols) = img.dims();
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        out.extend(img.pixels()[r * cols..(r + 1) * cols].iter().rev());
    }
    let provenance = match &img.provenance {
        Provenance::Derived(s) if s.ends_with("+hflip") => {
            Provenance::Derived(s.trim_end_matches("+hflip").to_string())
        }
        p => Provenance::Derived(format!("{p}+hflip")),
    };
    UltrasoundImage::new(rows, cols, out, provenance).expect("flip preserves validity")
}

/// The dataset followed by a horizontally flipped copy of every item.
pub fn augment(dataset: &LabeledDataset) -> LabeledDataset {
    let mut items = dataset.items.clone();
    items.extend(dataset.items.iter().map(|(img, c)| (hflip(img), *c)));
    LabeledDataset {
        name: dataset.name.clone(),
        items,
    }
}
