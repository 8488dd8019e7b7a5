//! Synthetic B-mode speckle phantoms.
//!
//! Each phantom is `I(r, c) = clamp01(E(r) * S(r, c))`:
//!
//! * `E(r)` is the deterministic depth profile: a bright entry band over rows
//!   `0..ceil(0.05 * rows)`, then `tissue_brightness * exp(-attenuation * r / rows)`.
//! * `S(r, c) = 1 + a * [r < d * rows] * (R(r, c) - mean(R))`, where `R` is a
//!   Rayleigh (sigma = 1) field smoothed by a separable Gaussian of standard
//!   deviation `correlation_length`. The Gaussian taps have unit L2 norm, so
//!   smoothing keeps the Rayleigh variance `(4 - pi) / 2`.
//!
//! `a` (speckle contrast) and `d` (speckled depth fraction) grow with burn
//! severity; everything else is shared by all classes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BurnClass, LabeledDataset, Provenance, UltrasoundImage};
use crate::error::{Error, Result};
use crate::rng::Rng;

pub const FULL_ROWS: usize = 213;
pub const FULL_COLS: usize = 338;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhantomParams {
    /// Speckle contrast per class, indexed by [`BurnClass::severity`].
    pub contrast: [f64; 5],
    /// Fraction of rows carrying speckle, per class.
    pub depth_fraction: [f64; 5],
    pub attenuation: f64,
    /// Gaussian smoothing sigma in pixels; 0 disables smoothing.
    pub correlation_length: f64,
    pub entry_brightness: f64,
    pub tissue_brightness: f64,
}

impl Default for PhantomParams {
    fn default() -> Self {
        PhantomParams {
            contrast: [0.15, 0.30, 0.45, 0.60, 0.80],
            depth_fraction: [0.25, 0.35, 0.55, 0.75, 1.0],
            attenuation: 1.0,
            correlation_length: 2.0,
            entry_brightness: 0.85,
            tissue_brightness: 0.45,
        }
    }
}

impl PhantomParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !self.contrast.iter().chain(&self.depth_fraction).all(|&v| unit(v)) {
            return Err(Error::InvalidArgument(
                "phantom contrast and depth fractions must lie in [0, 1]".into(),
            ));
        }
        let increasing = |v: &[f64; 5]| v.windows(2).all(|w| w[0] < w[1]);
        if !increasing(&self.contrast) || !increasing(&self.depth_fraction) {
            return Err(Error::InvalidArgument(
                "phantom contrast and depth fractions must strictly increase with severity".into(),
            ));
        }
        if !(self.attenuation >= 0.0 && self.correlation_length >= 0.0) {
            return Err(Error::InvalidArgument(
                "attenuation and correlation length must be non-negative".into(),
            ));
        }
        if !(unit(self.entry_brightness) && unit(self.tissue_brightness)) {
            return Err(Error::InvalidArgument("brightness levels must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Deterministic depth profile `E(r)`.
    pub fn depth_profile(&self, rows: usize) -> Vec<f64> {
        let entry = (0.05 * rows as f64).ceil() as usize;
        (0..rows)
            .map(|r| {
                if r < entry {
                    self.entry_brightness
                } else {
                    self.tissue_brightness * (-self.attenuation * r as f64 / rows as f64).exp()
                }
            })
            .collect()
    }

    /// Number of leading rows that carry speckle for `class`.
    pub fn speckle_rows(&self, class: BurnClass, rows: usize) -> usize {
        let limit = self.depth_fraction[class.severity()] * rows as f64;
        (0..rows).take_while(|&r| (r as f64) < limit).count()
    }
}

fn gaussian_taps(sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    raw.into_iter().map(|v| v / norm).collect()
}

/// Separable filter with edge replication.
fn smooth(field: &[f64], rows: usize, cols: usize, taps: &[f64]) -> Vec<f64> {
    if taps.len() == 1 {
        return field.iter().map(|v| v * taps[0]).collect();
    }
    let radius = (taps.len() / 2) as isize;
    let clampi = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let mut tmp = vec![0.0; rows * cols];
    for r in 0..rows {
        let row = &field[r * cols..(r + 1) * cols];
        for c in 0..cols {
            tmp[r * cols + c] = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * row[clampi(c as isize + k as isize - radius, cols)])
                .sum();
        }
    }
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows {
        for (k, t) in taps.iter().enumerate() {
            let src = clampi(r as isize + k as isize - radius, rows);
            let (dst_row, src_row) = (r * cols, src * cols);
            for c in 0..cols {
                out[dst_row + c] += t * tmp[src_row + c];
            }
        }
    }
    out
}

/// Draws one phantom of the given class from `rng`.
pub fn generate_phantom(
    class: BurnClass,
    params: &PhantomParams,
    rng: &mut Rng,
    rows: usize,
    cols: usize,
) -> Result<UltrasoundImage> {
    params.validate()?;
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument(format!("empty phantom {rows}x{cols}")));
    }
    let profile = params.depth_profile(rows);
    let contrast = params.contrast[class.severity()];
    let speckled = params.speckle_rows(class, rows);
    let provenance = Provenance::Derived(format!("phantom:{class}:{}", rng.seed()));

    let mut pixels = Vec::with_capacity(rows * cols);
    if contrast == 0.0 || speckled == 0 {
        for e in &profile {
            pixels.extend(std::iter::repeat_n(e.clamp(0.0, 1.0), cols));
        }
        return UltrasoundImage::new(rows, cols, pixels, provenance);
    }

    let rayleigh: Vec<f64> = (0..rows * cols)
        .map(|_| (-2.0 * (1.0 - rng.uniform()).ln()).sqrt())
        .collect();
    let field = smooth(&rayleigh, rows, cols, &gaussian_taps(params.correlation_length));
    let mean = field.iter().sum::<f64>() / field.len() as f64;
    for (r, e) in profile.iter().enumerate() {
        let gain = if r < speckled { contrast } else { 0.0 };
        for c in 0..cols {
            let s = 1.0 + gain * (field[r * cols + c] - mean);
            pixels.push((e * s).clamp(0.0, 1.0));
        }
    }
    UltrasoundImage::new(rows, cols, pixels, provenance)
}

/// Generates `count` phantoms per listed class. Phantom `i` of class `c`
/// draws from `Rng::derive(seed, [severity(c), i])`, so the result does not
/// depend on generation order or thread count.
pub fn generate_dataset(
    name: &str,
    per_class: &[(BurnClass, usize)],
    params: &PhantomParams,
    seed: u64,
    rows: usize,
    cols: usize,
) -> Result<LabeledDataset> {
    params.validate()?;
    let jobs: Vec<(BurnClass, usize)> = per_class
        .iter()
        .flat_map(|&(class, n)| (0..n).map(move |i| (class, i)))
        .collect();
    let items = jobs
        .par_iter()
        .map(|&(class, index)| {
            let mut rng = Rng::derive(seed, &[class.severity() as u64, index as u64]);
            let mut img = generate_phantom(class, params, &mut rng, rows, cols)?;
            img.provenance = Provenance::Synthetic { seed, class, index };
            Ok((img, class))
        })
        .collect::<Result<Vec<_>>>()?;
    LabeledDataset::new(name, items)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_contrast_is_depth_profile() {
        let mut params = PhantomParams::default();
        params.contrast[0] = 0.0;
        let img = generate_phantom(BurnClass::Unburned, &params, &mut Rng::new(1), 40, 30).unwrap();
        let profile = params.depth_profile(40);
        for r in 0..40 {
            for c in 0..30 {
                assert_eq!(img.at(r, c), profile[r]);
            }
        }
        // entry band then attenuation
        assert_eq!(profile[0], 0.85);
        assert_eq!(profile[1], 0.85);
        assert!(profile[2] < profile[1] && profile[39] < profile[2]);
    }

    #[test]
    fn deterministic_per_seed_and_class() {
        let p = PhantomParams::default();
        let a = generate_phantom(BurnClass::DP, &p, &mut Rng::new(77), 50, 60).unwrap();
        let b = generate_phantom(BurnClass::DP, &p, &mut Rng::new(77), 50, 60).unwrap();
        let c = generate_phantom(BurnClass::DP, &p, &mut Rng::new(78), 50, 60).unwrap();
        assert_eq!(a.pixels(), b.pixels());
        assert_ne!(a.pixels(), c.pixels());
    }

    #[test]
    fn speckle_confined_to_band() {
        let p = PhantomParams::default();
        let img = generate_phantom(BurnClass::SP, &p, &mut Rng::new(3), 100, 50).unwrap();
        let band = p.speckle_rows(BurnClass::SP, 100);
        assert_eq!(band, 35);
        let profile = p.depth_profile(100);
        for r in band..100 {
            for c in 0..50 {
                assert_eq!(img.at(r, c), profile[r]);
            }
        }
    }

    #[test]
    fn taps_have_unit_energy() {
        let t = gaussian_taps(2.0);
        assert_eq!(t.len(), 13);
        assert!((t.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_monotone_params() {
        let mut p = PhantomParams::default();
        p.contrast[2] = 0.1;
        assert!(p.validate().is_err());
        let mut q = PhantomParams::default();
        q.depth_fraction[4] = 1.2;
        assert!(q.validate().is_err());
    }

    #[test]
    fn dataset_order_and_provenance() {
        let p = PhantomParams::default();
        let ds = generate_dataset(
            "t",
            &[(BurnClass::SP, 2), (BurnClass::DFT, 3)],
            &p,
            9,
            20,
            24,
        )
        .unwrap();
        assert_eq!(ds.len(), 5);
        assert_eq!(
            ds.labels(),
            vec![BurnClass::SP, BurnClass::SP, BurnClass::DFT, BurnClass::DFT, BurnClass::DFT]
        );
        let single = generate_phantom(
            BurnClass::DFT,
            &p,
            &mut Rng::derive(9, &[4, 1]),
            20,
            24,
        )
        .unwrap();
        assert_eq!(ds.items[3].0.pixels(), single.pixels());
    }
}
