use super::{Heatmap, Normalization};
use crate::data::UltrasoundImage;
use crate::error::{Error, Result};
use crate::model::{TargetClassifier, TaskMode};
use crate::nn::{ReluMode, Sequential, Trace};
use crate::tensor::Tensor;

/// The explained score: `sign * logits[index]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreTarget {
    pub index: usize,
    pub sign: f64,
}

impl ScoreTarget {
    pub fn logit(index: usize) -> Self {
        ScoreTarget { index, sign: 1.0 }
    }

    /// Binary heads emit one logit for the positive class; the negative
    /// class is explained through the negated logit.
    pub fn for_label(mode: TaskMode, label: usize) -> Result<Self> {
        if label >= mode.num_labels() {
            return Err(Error::InvalidArgument(format!(
                "label {label} out of range for {} task",
                mode.as_str()
            )));
        }
        Ok(match mode {
            TaskMode::Binary => ScoreTarget {
                index: 0,
                sign: if label == 1 { 1.0 } else { -1.0 },
            },
            TaskMode::Multiclass => ScoreTarget::logit(label),
        })
    }
}

fn check_finite(net: &Sequential) -> Result<()> {
    if net.params().iter().all(|p| p.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical("model parameters contain NaN or infinity".into()))
    }
}

fn score_seed(trace: &Trace, target: ScoreTarget) -> Result<Tensor> {
    let out = trace.output();
    if out.rank() != 1 || target.index >= out.numel() {
        return Err(Error::InvalidArgument(format!(
            "score index {} not available in output of shape {:?}",
            target.index,
            out.shape()
        )));
    }
    let mut dy = Tensor::zeros(out.shape());
    dy.data_mut()[target.index] = target.sign;
    Ok(dy)
}

fn image_dims(x: &Tensor) -> Result<(usize, usize)> {
    match *x.shape() {
        [1, h, w] => Ok((h, w)),
        _ => Err(Error::InvalidArgument(format!("expected a [1, H, W] input, got {:?}", x.shape()))),
    }
}

/// `|d score / d input|` with guided ReLU backward passes.
pub fn guided_backprop_net(net: &Sequential, x: &Tensor, target: ScoreTarget) -> Result<Heatmap> {
    check_finite(net)?;
    let (h, w) = image_dims(x)?;
    let trace = net.trace(x)?;
    let dy = score_seed(&trace, target)?;
    let g = net
        .backward(&trace, &dy, None, ReluMode::Guided, 0, true)?
        .expect("input gradient requested");
    Heatmap::new(h, w, g.data().iter().map(|v| v.abs()).collect(), Normalization::Raw)
}

/// Grad-CAM++ on the output of `net.layers()[layer]`, bilinearly resized to
/// the input size.
pub fn gradcam_pp_net(net: &Sequential, x: &Tensor, target: ScoreTarget, layer: usize) -> Result<Heatmap> {
    check_finite(net)?;
    let (h, w) = image_dims(x)?;
    if layer >= net.len() {
        return Err(Error::InvalidArgument(format!("layer {layer} beyond {} layers", net.len())));
    }
    let trace = net.trace(x)?;
    let dy = score_seed(&trace, target)?;
    let acts = &trace.acts[layer + 1];
    let (k, fh, fw) = match *acts.shape() {
        [k, fh, fw] if k > 0 && fh > 0 && fw > 0 => (k, fh, fw),
        _ => {
            return Err(Error::InvalidArgument(format!(
                "layer {layer} output {:?} has no spatial extent",
                acts.shape()
            )))
        }
    };
    let grads = net
        .backward(&trace, &dy, None, ReluMode::Standard, layer + 1, true)?
        .expect("activation gradient requested");
    let plane = fh * fw;
    let mut cam = vec![0.0; plane];
    for c in 0..k {
        let a = &acts.data()[c * plane..(c + 1) * plane];
        let g = &grads.data()[c * plane..(c + 1) * plane];
        let a_sum: f64 = a.iter().sum();
        let weight: f64 = g
            .iter()
            .map(|&gv| {
                let g2 = gv * gv;
                let alpha = g2 / (2.0 * g2 + a_sum * g2 * gv + 1e-12);
                alpha * gv.max(0.0)
            })
            .sum();
        for (m, av) in cam.iter_mut().zip(a) {
            *m += weight * av;
        }
    }
    cam.iter_mut().for_each(|v| *v = v.max(0.0));
    let up = resize_bilinear(&cam, fh, fw, h, w);
    Heatmap::new(h, w, up.into_iter().map(|v| v.max(0.0)).collect(), Normalization::Raw)
}

/// Bilinear resize with half-pixel sample centers and edge clamping.
pub fn resize_bilinear(src: &[f64], rows: usize, cols: usize, out_rows: usize, out_cols: usize) -> Vec<f64> {
    assert_eq!(src.len(), rows * cols);
    let coord = |i: usize, from: usize, to: usize| -> (usize, usize, f64) {
        let s = ((i as f64 + 0.5) * from as f64 / to as f64 - 0.5).clamp(0.0, (from - 1) as f64);
        let lo = s.floor() as usize;
        let hi = (lo + 1).min(from - 1);
        (lo, hi, s - lo as f64)
    };
    let mut out = Vec::with_capacity(out_rows * out_cols);
    for r in 0..out_rows {
        let (r0, r1, fr) = coord(r, rows, out_rows);
        for c in 0..out_cols {
            let (c0, c1, fc) = coord(c, cols, out_cols);
            let top = src[r0 * cols + c0] * (1.0 - fc) + src[r0 * cols + c1] * fc;
            let bottom = src[r1 * cols + c0] * (1.0 - fc) + src[r1 * cols + c1] * fc;
            out.push(top * (1.0 - fr) + bottom * fr);
        }
    }
    out
}

fn classifier_input(clf: &TargetClassifier, img: &UltrasoundImage) -> Result<Tensor> {
    let cfg = clf.config();
    if img.dims() != (cfg.input_rows, cfg.input_cols) {
        return Err(Error::shape(&[cfg.input_rows, cfg.input_cols], &[img.rows(), img.cols()]));
    }
    Ok(img.to_tensor())
}

fn target_for(clf: &TargetClassifier, label: usize) -> Result<ScoreTarget> {
    ScoreTarget::for_label(clf.mode(), label)
}

pub fn guided_backprop(clf: &TargetClassifier, img: &UltrasoundImage, label: usize) -> Result<Heatmap> {
    let x = classifier_input(clf, img)?;
    guided_backprop_net(clf.net(), &x, target_for(clf, label)?)
}

/// `layer` defaults to the encoder's last layer (the bottleneck activation).
pub fn gradcam_pp(clf: &TargetClassifier, img: &UltrasoundImage, label: usize, layer: Option<usize>) -> Result<Heatmap> {
    let x = classifier_input(clf, img)?;
    let layer = layer.unwrap_or(clf.encoder_len() - 1);
    gradcam_pp_net(clf.net(), &x, target_for(clf, label)?, layer)
}

pub fn guided_gradcam_pp(
    clf: &TargetClassifier,
    img: &UltrasoundImage,
    label: usize,
    layer: Option<usize>,
) -> Result<Heatmap> {
    guided_backprop(clf, img, label)?.product(&gradcam_pp(clf, img, label, layer)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{AvgPool2d, Conv2d, Dense, Layer};
    use crate::rng::Rng;

    fn conv(cin: usize, cout: usize, w: &[f64], b: &[f64]) -> Conv2d {
        let mut c = Conv2d::new(cin, cout, 2, 1, &mut Rng::new(0)).unwrap();
        c.weight.data_mut().copy_from_slice(w);
        c.bias.data_mut().copy_from_slice(b);
        c
    }

    fn dense(w: &[f64], b: &[f64]) -> Dense {
        let mut d = Dense::new(w.len() / b.len(), b.len(), &mut Rng::new(0)).unwrap();
        d.weight.data_mut().copy_from_slice(w);
        d.bias.data_mut().copy_from_slice(b);
        d
    }

    fn random_input(h: usize, w: usize, seed: u64) -> Tensor {
        let mut rng = Rng::new(seed);
        Tensor::new(vec![1, h, w], (0..h * w).map(|_| rng.uniform_range(-1.0, 1.0)).collect()).unwrap()
    }

    #[test]
    fn relu_free_network_gives_plain_gradient() {
        let mut rng = Rng::new(3);
        let net = Sequential::new(vec![
            Layer::Conv(Conv2d::new(1, 3, 2, 1, &mut rng).unwrap()),
            Layer::AvgPool(AvgPool2d::default()),
            Layer::GlobalAvgPool,
            Layer::Dense(Dense::new(3, 2, &mut rng).unwrap()),
        ]);
        let x = random_input(5, 6, 4);
        let map = guided_backprop_net(&net, &x, ScoreTarget::logit(1)).unwrap();
        let trace = net.trace(&x).unwrap();
        let plain = net
            .backward(&trace, &Tensor::from_slice(&[0.0, 1.0]), None, ReluMode::Standard, 0, true)
            .unwrap()
            .unwrap();
        for (m, g) in map.values().iter().zip(plain.data()) {
            assert!((m - g.abs()).abs() <= 1e-10);
        }
    }

    #[test]
    fn zero_head_gives_zero_map() {
        let mut rng = Rng::new(1);
        let net = Sequential::new(vec![
            Layer::Conv(Conv2d::new(1, 2, 2, 1, &mut rng).unwrap()),
            Layer::Relu,
            Layer::GlobalAvgPool,
            Layer::Dense(dense(&[0.0, 0.0], &[0.3])),
        ]);
        let x = random_input(4, 4, 2);
        assert!(guided_backprop_net(&net, &x, ScoreTarget::logit(0)).unwrap().values().iter().all(|&v| v == 0.0));
        assert!(gradcam_pp_net(&net, &x, ScoreTarget::logit(0), 1).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_relu_hand_computed() {
        // 2x2 input -> one conv output y = w.x + b -> ReLU -> GAP -> v * y.
        let w = [0.5, -1.0, 2.0, 0.25];
        let x = Tensor::new(vec![1, 2, 2], vec![1.0, 0.5, 0.75, -2.0]).unwrap();
        let y: f64 = w.iter().zip(x.data()).map(|(a, b)| a * b).sum::<f64>() + 0.1;
        assert!(y > 0.0);
        let build = |v: f64| {
            Sequential::new(vec![
                Layer::Conv(conv(1, 1, &w, &[0.1])),
                Layer::Relu,
                Layer::GlobalAvgPool,
                Layer::Dense(dense(&[v], &[0.0])),
            ])
        };
        let up = guided_backprop_net(&build(3.0), &x, ScoreTarget::logit(0)).unwrap();
        let expected: Vec<f64> = w.iter().map(|wi| (3.0 * wi).abs()).collect();
        assert_eq!(up.values(), expected.as_slice());
        // A negative head weight sends a negative gradient into the ReLU,
        // which the guided pass blocks.
        let down = guided_backprop_net(&build(-3.0), &x, ScoreTarget::logit(0)).unwrap();
        assert!(down.values().iter().all(|&v| v == 0.0));
        // Explaining the negated logit flips the sign back.
        let flipped = guided_backprop_net(&build(-3.0), &x, ScoreTarget { index: 0, sign: -1.0 }).unwrap();
        assert_eq!(flipped.values(), expected.as_slice());
    }

    #[test]
    fn gradcam_of_mean_score_tracks_feature_map() {
        // Score = mean of the single conv map, so every pixel gradient is 1/4
        // and the map is a positive multiple of the activation's positive part.
        let net = Sequential::new(vec![
            Layer::Conv(conv(1, 1, &[1.0, -0.5, 0.25, 2.0], &[0.0])),
            Layer::GlobalAvgPool,
            Layer::Dense(dense(&[1.0], &[0.0])),
        ]);
        let x = Tensor::new(vec![1, 3, 3], vec![1.0, 0.2, -0.3, 0.5, 0.9, -1.0, 0.4, -0.6, 0.8]).unwrap();
        let a = net.layers()[0].forward(&x).unwrap();
        let a_sum = a.sum();
        assert!(a_sum > 0.0);
        let g: f64 = 0.25;
        let alpha = g * g / (2.0 * g * g + a_sum * g.powi(3) + 1e-12);
        let weight = 4.0 * alpha * g;
        let pos: Vec<f64> = a.data().iter().map(|v| (weight * v).max(0.0)).collect();
        let expected = resize_bilinear(&pos, 2, 2, 3, 3);
        let map = gradcam_pp_net(&net, &x, ScoreTarget::logit(0), 0).unwrap();
        assert_eq!((map.rows(), map.cols()), (3, 3));
        for (m, e) in map.values().iter().zip(&expected) {
            assert!((m - e).abs() < 1e-14);
        }
    }

    #[test]
    fn gradcam_rejects_flat_layer() {
        let mut rng = Rng::new(1);
        let net = Sequential::new(vec![
            Layer::Conv(Conv2d::new(1, 2, 2, 1, &mut rng).unwrap()),
            Layer::GlobalAvgPool,
            Layer::Dense(Dense::new(2, 1, &mut rng).unwrap()),
        ]);
        let x = random_input(4, 4, 1);
        assert!(gradcam_pp_net(&net, &x, ScoreTarget::logit(0), 1).is_err());
        assert!(gradcam_pp_net(&net, &x, ScoreTarget::logit(0), 7).is_err());
        assert!(gradcam_pp_net(&net, &x, ScoreTarget::logit(3), 0).is_err());
    }

    #[test]
    fn nan_weights_rejected() {
        let mut c = Conv2d::new(1, 1, 2, 1, &mut Rng::new(0)).unwrap();
        c.weight.data_mut()[0] = f64::NAN;
        let net = Sequential::new(vec![Layer::Conv(c), Layer::GlobalAvgPool]);
        assert!(guided_backprop_net(&net, &random_input(3, 3, 0), ScoreTarget::logit(0)).is_err());
    }

    #[test]
    fn resize_identity_and_constant() {
        let src = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        assert_eq!(resize_bilinear(&src, 2, 3, 2, 3), src.to_vec());
        assert!(resize_bilinear(&[0.7; 4], 2, 2, 5, 7).iter().all(|&v| (v - 0.7).abs() < 1e-15));
        // Upsampling a 1x2 ramp by 2 interpolates between the sample centers.
        assert_eq!(resize_bilinear(&[0.0, 1.0], 1, 2, 1, 4), vec![0.0, 0.25, 0.75, 1.0]);
    }
}
