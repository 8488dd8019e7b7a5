//! Phantom statistics, directory ingestion and fold hygiene on full-size data.

use std::collections::HashSet;

use burnnet::data::io::MANIFEST_FILE;
use burnnet::data::phantom::{FULL_COLS, FULL_ROWS};
use burnnet::data::{
    augment, generate_dataset, generate_phantom, kfold_split, load_image_dir, write_snapshot, BurnClass, Manifest,
    PhantomParams, UltrasoundImage,
};
use burnnet::texture::{compute_glcm, haralick_features, DEFAULT_LEVELS, DEFAULT_OFFSETS};
use burnnet::Rng;

/// Column variance of each speckled row, averaged over the band. Columns share
/// the depth profile, so this isolates the speckle.
fn band_variance(img: &UltrasoundImage, band_rows: usize) -> f64 {
    let cols = img.cols();
    let per_row: Vec<f64> = (0..band_rows)
        .map(|r| {
            let row: Vec<f64> = (0..cols).map(|c| img.at(r, c)).collect();
            let mean = row.iter().sum::<f64>() / cols as f64;
            row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / cols as f64
        })
        .collect();
    per_row.iter().sum::<f64>() / band_rows as f64
}

#[test]
fn speckle_variance_increases_with_severity() {
    let params = PhantomParams::default();
    let means: Vec<f64> = BurnClass::ALL
        .iter()
        .map(|&class| {
            let band = params.speckle_rows(class, FULL_ROWS);
            (0..100u64)
                .map(|seed| {
                    let img = generate_phantom(class, &params, &mut Rng::new(seed), FULL_ROWS, FULL_COLS).unwrap();
                    band_variance(&img, band)
                })
                .sum::<f64>()
                / 100.0
        })
        .collect();
    assert!(means.windows(2).all(|w| w[0] < w[1]), "{means:?}");
}

#[test]
fn glcm_contrast_increases_with_severity() {
    let params = PhantomParams::default();
    let means: Vec<f64> = BurnClass::ALL
        .iter()
        .map(|&class| {
            (0..50u64)
                .map(|seed| {
                    let img = generate_phantom(class, &params, &mut Rng::new(500 + seed), FULL_ROWS, FULL_COLS).unwrap();
                    let g = compute_glcm(&img, DEFAULT_LEVELS, &DEFAULT_OFFSETS).unwrap();
                    haralick_features(&g).get("contrast").unwrap()
                })
                .sum::<f64>()
                / 50.0
        })
        .collect();
    assert!(means.windows(2).all(|w| w[0] < w[1]), "{means:?}");
}

#[test]
fn four_hundred_images_round_trip_through_a_directory() {
    let all: Vec<(BurnClass, usize)> = BurnClass::ALL.iter().map(|&c| (c, 80)).collect();
    let ds = generate_dataset("phantoms", &all, &PhantomParams::default(), 4, FULL_ROWS, FULL_COLS).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let files = write_snapshot(&ds, tmp.path()).unwrap();
    assert_eq!(files.len(), 400);
    let manifest = Manifest::read(&tmp.path().join(MANIFEST_FILE)).unwrap();
    let back = load_image_dir(tmp.path(), &manifest).unwrap();
    assert_eq!(back.len(), 400);
    assert_eq!(back.class_counts(), ds.class_counts());
    assert_eq!(back.dims(), Some((FULL_ROWS, FULL_COLS)));
    // 8-bit quantization bounds the round-trip error.
    for ((a, ca), (b, cb)) in ds.items.iter().zip(&back.items) {
        assert_eq!(ca, cb);
        let worst = a.pixels().iter().zip(b.pixels()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(worst <= 0.5 / 255.0 + 1e-12, "{worst}");
    }
}

fn pixel_key(img: &UltrasoundImage) -> Vec<u64> {
    img.pixels().iter().map(|v| v.to_bits()).collect()
}

#[test]
fn twenty_folds_keep_flipped_test_images_out_of_training() {
    let burns: Vec<(BurnClass, usize)> = BurnClass::BURNS.iter().map(|&c| (c, 80)).collect();
    let ds = generate_dataset("burns", &burns, &PhantomParams::default(), 9, 22, 34).unwrap();
    let folds = kfold_split(&ds.labels(), 20, 3).unwrap();
    assert_eq!(folds, kfold_split(&ds.labels(), 20, 3).unwrap());
    let mut seen = vec![0usize; ds.len()];
    for fold in &folds {
        assert_eq!(fold.test.len(), 16);
        for class in BurnClass::BURNS {
            assert_eq!(fold.test.iter().filter(|&&i| ds.items[i].1 == class).count(), 4);
        }
        for &i in &fold.test {
            seen[i] += 1;
        }
        let train: HashSet<Vec<u64>> = augment(&ds.subset(&fold.train)).items.iter().map(|(img, _)| pixel_key(img)).collect();
        assert_eq!(train.len(), 2 * fold.train.len());
        for &i in &fold.test {
            let img = &ds.items[i].0;
            assert!(!train.contains(&pixel_key(img)));
            assert!(!train.contains(&pixel_key(&burnnet::data::hflip(img))));
        }
    }
    assert!(seen.iter().all(|&n| n == 1));
}
