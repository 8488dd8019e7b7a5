//! Class-per-directory image trees.
//!
//! Layout on disk:
//!
//! ```text
//! <root>/manifest.csv        directory,class      (one row per class directory)
//! <root>/<directory>/*.png   8-bit grayscale rasters
//! <root>/index.csv           filename,class,provenance,seed   (written by snapshots)
//! ```
//!
//! Pixels are mapped to `[0, 1]` by dividing by 255.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use image::{ColorType, GrayImage};

use super::{BurnClass, LabeledDataset, Provenance, UltrasoundImage};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.csv";
pub const INDEX_FILE: &str = "index.csv";

/// Maps class directory names to burn classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub entries: Vec<(String, BurnClass)>,
}

impl Default for Manifest {
    /// One directory per class, named after the class.
    fn default() -> Self {
        Manifest {
            entries: BurnClass::ALL
                .iter()
                .map(|c| (c.as_str().to_string(), *c))
                .collect(),
        }
    }
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || (n == 0 && line == "directory,class") {
                continue;
            }
            let (dir, class) = line.split_once(',').ok_or_else(|| {
                Error::Data(format!("manifest line {}: expected 'directory,class'", n + 1))
            })?;
            entries.push((dir.trim().to_string(), class.parse()?));
        }
        Ok(Manifest { entries })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("directory,class\n");
        for (dir, class) in &self.entries {
            let _ = writeln!(s, "{dir},{class}");
        }
        s
    }

    fn class_of(&self, dir: &str) -> Option<BurnClass> {
        self.entries.iter().find(|(d, _)| d == dir).map(|(_, c)| *c)
    }
}

pub fn read_gray_png(path: &Path) -> Result<UltrasoundImage> {
    let img = image::open(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    if img.color() != ColorType::L8 {
        return Err(Error::Image {
            path: path.to_path_buf(),
            message: format!("expected 8-bit grayscale, found {:?}", img.color()),
        });
    }
    let gray = img.into_luma8();
    let (cols, rows) = gray.dimensions();
    let pixels = gray.as_raw().iter().map(|&v| f64::from(v) / 255.0).collect();
    UltrasoundImage::new(
        rows as usize,
        cols as usize,
        pixels,
        Provenance::File(path.to_path_buf()),
    )
}

/// Writes values in `[0, 1]` (clamped) as an 8-bit grayscale PNG.
pub fn write_gray_png(path: &Path, rows: usize, cols: usize, values: &[f64]) -> Result<()> {
    if values.len() != rows * cols {
        return Err(Error::shape(&[rows * cols], &[values.len()]));
    }
    let bytes: Vec<u8> = values
        .iter()
        .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    let img = GrayImage::from_raw(cols as u32, rows as u32, bytes)
        .ok_or_else(|| Error::InvalidArgument("raster buffer size mismatch".into()))?;
    img.save(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<_>>()?;
    out.sort();
    Ok(out)
}

/// Loads every `*.png` under the class directories named in `manifest`.
/// Files are visited in manifest order, then by file name.
pub fn load_image_dir(root: &Path, manifest: &Manifest) -> Result<LabeledDataset> {
    let name = root
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let entries = sorted_entries(root)?;
    let unknown: Vec<String> = entries
        .iter()
        .filter(|p| p.is_dir())
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .filter(|d| manifest.class_of(d).is_none())
        .collect();
    if !unknown.is_empty() {
        return Err(Error::Data(format!(
            "directories not listed in the manifest: {}",
            unknown.join(", ")
        )));
    }

    let mut items = Vec::new();
    let mut unreadable = Vec::new();
    for (dir, class) in &manifest.entries {
        let path = root.join(dir);
        if !path.is_dir() {
            continue;
        }
        for file in sorted_entries(&path)? {
            let is_png = file
                .extension()
                .is_some_and(|e| e.eq_ignore_ascii_case("png"));
            if !is_png || !file.is_file() {
                continue;
            }
            match read_gray_png(&file) {
                Ok(img) => items.push((img, *class)),
                Err(e) => unreadable.push(e.to_string()),
            }
        }
    }
    if !unreadable.is_empty() {
        return Err(Error::Data(format!(
            "unreadable images: {}",
            unreadable.join("; ")
        )));
    }
    if items.is_empty() {
        log::warn!("no images found under {}", root.display());
    }
    LabeledDataset::new(name, items)
}

/// Writes a dataset as `<dir>/<Class>/<Class>_<nnnn>.png` plus `index.csv`
/// and `manifest.csv`. Returns the raster paths in dataset order.
pub fn write_snapshot(dataset: &LabeledDataset, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut counters = [0usize; 5];
    let mut index = String::from("filename,class,provenance,seed\n");
    let mut written = Vec::with_capacity(dataset.len());
    let mut classes_present = Vec::new();
    for (img, class) in &dataset.items {
        let class_dir = dir.join(class.as_str());
        if !classes_present.contains(class) {
            fs::create_dir_all(&class_dir).map_err(|e| Error::io(&class_dir, e))?;
            classes_present.push(*class);
        }
        let n = &mut counters[class.severity()];
        let rel = format!("{}/{}_{:04}.png", class.as_str(), class.as_str(), n);
        *n += 1;
        let path = dir.join(&rel);
        write_gray_png(&path, img.rows(), img.cols(), img.pixels())?;
        let seed = match img.provenance {
            Provenance::Synthetic { seed, .. } => seed.to_string(),
            _ => String::new(),
        };
        let _ = writeln!(index, "{rel},{class},{},{seed}", img.provenance);
        written.push(path);
    }
    classes_present.sort_unstable();
    let manifest = Manifest {
        entries: classes_present
            .iter()
            .map(|c| (c.as_str().to_string(), *c))
            .collect(),
    };
    let index_path = dir.join(INDEX_FILE);
    fs::write(&index_path, index).map_err(|e| Error::io(&index_path, e))?;
    let manifest_path = dir.join(MANIFEST_FILE);
    fs::write(&manifest_path, manifest.to_csv()).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(rows: usize, cols: usize, v: f64) -> UltrasoundImage {
        UltrasoundImage::new(rows, cols, vec![v; rows * cols], Provenance::Derived("t".into()))
            .unwrap()
    }

    #[test]
    fn manifest_parse() {
        let m = Manifest::parse("directory,class\nsuperficial, SP\n# comment\ndeep,DFT\n").unwrap();
        assert_eq!(
            m.entries,
            vec![("superficial".into(), BurnClass::SP), ("deep".into(), BurnClass::DFT)]
        );
        assert!(Manifest::parse("a,b,c").is_err());
        assert_eq!(Manifest::parse(&m.to_csv()).unwrap(), m);
    }

    #[test]
    fn empty_directory_gives_empty_dataset() {
        let tmp = tempfile::tempdir().unwrap();
        let ds = load_image_dir(tmp.path(), &Manifest::default()).unwrap();
        assert!(ds.is_empty());
    }

    #[test]
    fn full_white_pixel_maps_to_one() {
        let tmp = tempfile::tempdir().unwrap();
        fs::create_dir(tmp.path().join("SP")).unwrap();
        write_gray_png(&tmp.path().join("SP/a.png"), 2, 3, &[1.0, 0.0, 0.5, 1.0, 1.0, 1.0]).unwrap();
        let ds = load_image_dir(tmp.path(), &Manifest::default()).unwrap();
        assert_eq!(ds.len(), 1);
        let px = ds.items[0].0.pixels();
        assert_eq!(px[0], 1.0);
        assert_eq!(px[1], 0.0);
        assert_eq!(px[2], 128.0 / 255.0);
    }

    #[test]
    fn error_paths() {
        let tmp = tempfile::tempdir().unwrap();
        fs::create_dir(tmp.path().join("mystery")).unwrap();
        let err = load_image_dir(tmp.path(), &Manifest::default()).unwrap_err();
        assert!(err.to_string().contains("mystery"));

        let tmp = tempfile::tempdir().unwrap();
        fs::create_dir(tmp.path().join("DP")).unwrap();
        write_gray_png(&tmp.path().join("DP/a.png"), 2, 2, &[0.0; 4]).unwrap();
        write_gray_png(&tmp.path().join("DP/b.png"), 3, 2, &[0.0; 6]).unwrap();
        let err = load_image_dir(tmp.path(), &Manifest::default()).unwrap_err();
        assert!(err.to_string().contains("b.png"), "{err}");

        let tmp = tempfile::tempdir().unwrap();
        fs::create_dir(tmp.path().join("DP")).unwrap();
        fs::write(tmp.path().join("DP/broken.png"), b"not a png").unwrap();
        let err = load_image_dir(tmp.path(), &Manifest::default()).unwrap_err();
        assert!(err.to_string().contains("broken.png"), "{err}");
    }

    #[test]
    fn snapshot_round_trip() {
        let tmp = tempfile::tempdir().unwrap();
        let ds = LabeledDataset::new(
            "x",
            vec![
                (gray(4, 5, 0.2), BurnClass::LFT),
                (gray(4, 5, 0.6), BurnClass::SP),
                (gray(4, 5, 1.0), BurnClass::SP),
            ],
        )
        .unwrap();
        let paths = write_snapshot(&ds, tmp.path()).unwrap();
        assert_eq!(paths.len(), 3);
        let manifest = Manifest::read(&tmp.path().join(MANIFEST_FILE)).unwrap();
        let back = load_image_dir(tmp.path(), &manifest).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back.labels(), vec![BurnClass::SP, BurnClass::SP, BurnClass::LFT]);
        assert_eq!(back.items[1].0.pixels()[0], 1.0);
        let index = fs::read_to_string(tmp.path().join(INDEX_FILE)).unwrap();
        assert_eq!(index.lines().count(), 4);
    }
}
