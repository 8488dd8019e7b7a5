//! Training-run oracles and network-level invariants.

use burnnet::data::{downsample, generate_dataset, BurnClass, LabeledDataset, PhantomParams, Provenance, UltrasoundImage};
use burnnet::model::{
    accuracy, build_classifier, build_source, train_classifier, train_source, transfer_to_classifier, BurnNetConfig,
    Pairing, TaskMode,
};
use burnnet::nn::layers::softmax;
use burnnet::nn::loss::{binary_cross_entropy, cross_entropy, reconstruction_loss};
use burnnet::{Rng, Tensor};
use proptest::prelude::*;

fn width(w: usize, epochs: usize, seed: u64) -> BurnNetConfig {
    BurnNetConfig {
        encoder_channels: [w; 4],
        bottleneck_channels: w,
        decoder_channels: [w; 4],
        epochs,
        seed,
        ..BurnNetConfig::default()
    }
}

fn degenerate_set() -> Vec<UltrasoundImage> {
    let per_class: Vec<(BurnClass, usize)> = BurnClass::ALL.iter().map(|&c| (c, 12)).collect();
    generate_dataset("ae", &per_class, &PhantomParams::default(), 21, 213, 338)
        .unwrap()
        .map_images(|img| downsample(img, 10))
        .unwrap()
        .items
        .into_iter()
        .map(|(img, _)| img)
        .collect()
}

fn train_degenerate() -> (f64, f64) {
    let images = degenerate_set();
    assert_eq!(images.len(), 60);
    let cfg = width(8, 200, 5);
    let mut model = build_source(&cfg).unwrap();
    let trace = train_source(&mut model, &images, &images, &cfg, Pairing::Paired, &mut Rng::new(5)).unwrap();
    assert_eq!(trace.len(), 200);
    (trace.first().unwrap(), trace.last().unwrap())
}

/// Loss of the best reconstruction that ignores lateral speckle: each row
/// replaced by its own mean.
fn row_mean_loss(img: &UltrasoundImage) -> f64 {
    let (rows, cols) = img.dims();
    let means: Vec<f64> = (0..rows)
        .flat_map(|r| {
            let m = (0..cols).map(|c| img.at(r, c)).sum::<f64>() / cols as f64;
            std::iter::repeat_n(m, cols)
        })
        .collect();
    reconstruction_loss(&img.to_tensor(), &Tensor::new(vec![1, rows, cols], means).unwrap()).unwrap()
}

/// The final 2x deconvolution and center crop map output row `i` onto
/// bottleneck row `(i + 3) / 2`, so the decoder cannot copy pixel-scale
/// speckle and the best it can do is a speckle-free reconstruction. Even the
/// per-image row means cost more than a tenth of the untrained loss.
#[test]
fn speckle_free_floor_exceeds_a_tenth_of_the_initial_loss() {
    let images = degenerate_set();
    let src = build_source(&width(8, 1, 5)).unwrap();
    let initial: f64 = images
        .iter()
        .map(|img| reconstruction_loss(&img.to_tensor(), &src.reconstruct(&img.to_tensor()).unwrap()).unwrap())
        .sum();
    let floor: f64 = images.iter().map(row_mean_loss).sum();
    assert!(floor > 0.1 * initial, "floor {floor} vs initial {initial}");
}

#[test]
fn autoencoder_degenerate_case_trains() {
    let (first, last) = train_degenerate();
    assert!(last < 0.25 * first, "loss {first} -> {last}");
}

#[test]
#[ignore = "unattainable with the cropped 2x decoder on default phantoms; see speckle_free_floor_exceeds_a_tenth_of_the_initial_loss"]
fn autoencoder_degenerate_case_reaches_a_tenth_of_the_initial_loss() {
    let (first, last) = train_degenerate();
    assert!(last < 0.1 * first, "loss {first} -> {last}");
}

fn block_image(bright: bool, rng: &mut Rng, index: usize) -> UltrasoundImage {
    let level = if bright { 0.7 } else { 0.3 };
    let pixels = (0..22 * 34).map(|_| level + rng.uniform_range(-0.1, 0.1)).collect();
    UltrasoundImage::new(22, 34, pixels, Provenance::Derived(format!("block:{bright}:{index}"))).unwrap()
}

/// Mean brightness separates the classes linearly.
fn separable_set(n: usize, seed: u64) -> LabeledDataset {
    let mut rng = Rng::new(seed);
    let items = (0..2 * n)
        .map(|i| {
            let dp = i % 2 == 0;
            (block_image(dp, &mut rng, i), if dp { BurnClass::DP } else { BurnClass::SP })
        })
        .collect();
    LabeledDataset::new("separable", items).unwrap()
}

#[test]
fn linearly_separable_set_is_learned() {
    let ds = separable_set(10, 1);
    let cfg = width(8, 300, 2);
    let mut clf = build_classifier(&cfg, TaskMode::Binary).unwrap();
    let trace = train_classifier(&mut clf, &ds, &cfg, &mut Rng::new(2)).unwrap();
    assert!(trace.0.iter().all(|l| l.is_finite()));
    assert_eq!(accuracy(&clf, &ds).unwrap(), 1.0);
}

#[test]
fn classifier_training_is_bitwise_deterministic() {
    let ds = separable_set(4, 3);
    let cfg = width(4, 5, 9);
    let run = || {
        let src = build_source(&cfg).unwrap();
        let mut clf = transfer_to_classifier(&src, TaskMode::Binary).unwrap();
        let trace = train_classifier(&mut clf, &ds, &cfg, &mut Rng::new(11)).unwrap();
        (clf.to_checkpoint().to_bytes().unwrap(), trace)
    };
    let (a, ta) = run();
    let (b, tb) = run();
    assert_eq!(ta, tb);
    assert!(a == b);
}

#[test]
fn warm_and_cold_encoders_match_untrained_source() {
    let cfg = width(4, 1, 13);
    let src = build_source(&cfg).unwrap();
    let warm = transfer_to_classifier(&src, TaskMode::Binary).unwrap();
    let cold = build_classifier(&cfg, TaskMode::Binary).unwrap();
    let n = warm.encoder_len();
    assert_eq!(&warm.net().layers()[..n], &cold.net().layers()[..n]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn softmax_sums_to_one_and_ignores_shifts(
        logits in prop::collection::vec(-30.0f64..30.0, 1..8),
        shift in -50.0f64..50.0,
    ) {
        let p = softmax(&Tensor::from_slice(&logits)).unwrap();
        prop_assert!((p.sum() - 1.0).abs() < 1e-12);
        let shifted: Vec<f64> = logits.iter().map(|v| v + shift).collect();
        let q = softmax(&Tensor::from_slice(&shifted)).unwrap();
        prop_assert!(p.max_abs_diff(&q).unwrap() < 1e-12);
    }

    #[test]
    fn losses_are_non_negative(
        x in prop::collection::vec(0.0f64..1.0, 1..20),
        noise in prop::collection::vec(-0.5f64..0.5, 20),
        prob in 0.0f64..=1.0,
        class in 0usize..4,
        logits in prop::collection::vec(-5.0f64..5.0, 4),
    ) {
        let target = Tensor::from_slice(&x);
        let recon = Tensor::from_slice(&x.iter().zip(&noise).map(|(a, b)| a + b).collect::<Vec<_>>());
        let l = reconstruction_loss(&target, &recon).unwrap();
        prop_assert!(l >= 0.0);
        prop_assert_eq!(l == 0.0, target == recon);
        prop_assert_eq!(reconstruction_loss(&target, &target).unwrap(), 0.0);
        prop_assert!(binary_cross_entropy(0.0, prob).unwrap() >= 0.0);
        prop_assert!(binary_cross_entropy(1.0, prob).unwrap() >= 0.0);
        let p = softmax(&Tensor::from_slice(&logits)).unwrap();
        prop_assert!(cross_entropy(class, &p).unwrap() >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn decoder_output_lies_strictly_inside_unit_interval(seed in 0u64..1000, scale in 0.0f64..5.0) {
        let src = build_source(&width(4, 1, seed)).unwrap();
        let mut rng = Rng::new(seed);
        let pixels: Vec<f64> = (0..22 * 34).map(|_| rng.uniform()).collect();
        let x = Tensor::new(vec![1, 22, 34], pixels).unwrap().scale(scale);
        let y = src.reconstruct(&x).unwrap();
        prop_assert_eq!(y.shape(), &[1, 22, 34]);
        prop_assert!(y.data().iter().all(|&v| v > 0.0 && v < 1.0));
    }
}
