//! Explanation maps on trained and hand-built networks.

use burnnet::data::{downsample, generate_dataset, BurnClass, PhantomParams};
use burnnet::model::{train_classifier, build_source, transfer_to_classifier, BurnNetConfig, TaskMode};
use burnnet::nn::{Conv2d, Dense, Layer, Sequential};
use burnnet::saliency::{
    class_average_heatmap, depth_profile, gradcam_pp, gradcam_pp_net, guided_backprop, guided_gradcam_pp,
    ScoreTarget,
};
use burnnet::{Rng, Tensor};

/// Conv 1x1 (1 -> 2), ReLU, global average pool, dense (2 -> 1). The score
/// gradient at the ReLU output is the constant `v_k / (H W)`, so the
/// Grad-CAM++ weights have a closed form.
#[test]
fn gradcam_pp_matches_closed_form_on_a_pointwise_network() {
    let (h, w) = (5usize, 7usize);
    let mut rng = Rng::new(4);
    let mut conv = Conv2d::new(1, 2, 1, 1, &mut rng).unwrap();
    conv.weight.data_mut().copy_from_slice(&[0.9, -0.6]);
    conv.bias.data_mut().copy_from_slice(&[0.1, 0.2]);
    let mut dense = Dense::new(2, 1, &mut rng).unwrap();
    dense.weight.data_mut().copy_from_slice(&[1.5, -0.8]);
    let net = Sequential::new(vec![Layer::Conv(conv), Layer::Relu, Layer::GlobalAvgPool, Layer::Dense(dense)]);
    let x: Vec<f64> = (0..h * w).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
    let input = Tensor::new(vec![1, h, w], x.clone()).unwrap();
    let map = gradcam_pp_net(&net, &input, ScoreTarget::logit(0), 1).unwrap();

    let acts: [Vec<f64>; 2] = [
        x.iter().map(|v| (0.9 * v + 0.1f64).max(0.0)).collect(),
        x.iter().map(|v| (-0.6 * v + 0.2f64).max(0.0)).collect(),
    ];
    let v = [1.5, -0.8];
    let weight = |k: usize| {
        let g: f64 = v[k] / (h * w) as f64;
        let total: f64 = acts[k].iter().sum();
        let alpha = g * g / (2.0 * g * g + total * g.powi(3) + 1e-12);
        (h * w) as f64 * alpha * g.max(0.0)
    };
    let (w0, w1) = (weight(0), weight(1));
    assert_eq!((map.rows(), map.cols()), (h, w));
    for i in 0..h * w {
        let expected = (w0 * acts[0][i] + w1 * acts[1][i]).max(0.0);
        assert!((map.values()[i] - expected).abs() < 1e-12, "pixel {i}");
    }
}

#[test]
fn trained_classifier_maps_are_consistent() {
    let per_class: Vec<(BurnClass, usize)> = BurnClass::BURNS.iter().map(|&c| (c, 3)).collect();
    let data = generate_dataset("sal", &per_class, &PhantomParams::default(), 8, 213, 338)
        .unwrap()
        .map_images(|img| downsample(img, 10))
        .unwrap();
    let cfg = BurnNetConfig {
        encoder_channels: [8; 4],
        bottleneck_channels: 8,
        decoder_channels: [8; 4],
        epochs: 20,
        seed: 3,
        ..BurnNetConfig::default()
    };
    for mode in [TaskMode::Binary, TaskMode::Multiclass] {
        let mut clf = transfer_to_classifier(&build_source(&cfg).unwrap(), mode).unwrap();
        train_classifier(&mut clf, &data, &cfg, &mut Rng::new(3)).unwrap();
        for label in 0..mode.num_labels() {
            let maps: Vec<_> = data
                .items
                .iter()
                .map(|(img, _)| {
                    let combined = guided_gradcam_pp(&clf, img, label, None).unwrap();
                    let guided = guided_backprop(&clf, img, label).unwrap();
                    let cam = gradcam_pp(&clf, img, label, None).unwrap();
                    assert_eq!((combined.rows(), combined.cols()), (22, 34));
                    assert_eq!((cam.rows(), cam.cols()), (22, 34));
                    for ((c, g), a) in combined.values().iter().zip(guided.values()).zip(cam.values()) {
                        assert!(*g >= 0.0 && *a >= 0.0 && g.is_finite() && a.is_finite());
                        assert_eq!(*c, g * a);
                    }
                    combined
                })
                .collect();
            let avg = class_average_heatmap(&maps).unwrap();
            assert!(avg.values().iter().all(|v| (0.0..=1.0).contains(v)));
            let profile = depth_profile(&avg);
            assert_eq!(profile.mean.len(), 22);
            let overall = avg.values().iter().sum::<f64>() / avg.values().len() as f64;
            assert!((profile.integrated_mean() - overall).abs() < 1e-12);
        }
    }
}
