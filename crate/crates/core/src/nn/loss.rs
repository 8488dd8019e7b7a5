//! Reconstruction and cross-entropy losses.

use crate::error::{Error, Result};
use crate::nn::layers::{sigmoid_scalar, softmax};
use crate::tensor::Tensor;

/// Probabilities are clamped to `[PROB_FLOOR, 1 - PROB_FLOOR]` before taking logs.
pub const PROB_FLOOR: f64 = 1e-12;

fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR)
}

/// `sum|x - z| + sum (x - z)^2` between a target `x` and a reconstruction `z`.
pub fn reconstruction_loss(target: &Tensor, recon: &Tensor) -> Result<f64> {
    if target.shape() != recon.shape() {
        return Err(Error::shape(target.shape(), recon.shape()));
    }
    Ok(target
        .data()
        .iter()
        .zip(recon.data())
        .map(|(x, z)| {
            let d = x - z;
            d.abs() + d * d
        })
        .sum())
}

/// Gradient of [`reconstruction_loss`] with respect to the reconstruction.
/// The subgradient of `|.|` at zero is 0.
pub fn reconstruction_loss_grad(target: &Tensor, recon: &Tensor) -> Result<Tensor> {
    if target.shape() != recon.shape() {
        return Err(Error::shape(target.shape(), recon.shape()));
    }
    let g = target
        .data()
        .iter()
        .zip(recon.data())
        .map(|(x, z)| {
            let d = z - x;
            let sign = if d > 0.0 {
                1.0
            } else if d < 0.0 {
                -1.0
            } else {
                0.0
            };
            sign + 2.0 * d
        })
        .collect();
    Tensor::new(target.shape().to_vec(), g)
}

fn check_binary_target(target: f64) -> Result<()> {
    if target != 0.0 && target != 1.0 {
        return Err(Error::InvalidArgument(format!(
            "binary target must be 0 or 1, got {target}"
        )));
    }
    Ok(())
}

/// `-[t log p + (1 - t) log(1 - p)]` with `p` clamped.
pub fn binary_cross_entropy(target: f64, prob: f64) -> Result<f64> {
    check_binary_target(target)?;
    let p = clamp_prob(prob);
    Ok(-(target * p.ln() + (1.0 - target) * (1.0 - p).ln()))
}

/// Derivative of [`binary_cross_entropy`] with respect to the (clamped) probability.
pub fn binary_cross_entropy_grad(target: f64, prob: f64) -> Result<f64> {
    check_binary_target(target)?;
    let p = clamp_prob(prob);
    Ok(-target / p + (1.0 - target) / (1.0 - p))
}

/// Mean binary cross-entropy over a minibatch.
pub fn binary_cross_entropy_mean(targets: &[f64], probs: &[f64]) -> Result<f64> {
    if targets.len() != probs.len() || targets.is_empty() {
        return Err(Error::shape(&[targets.len()], &[probs.len()]));
    }
    let mut total = 0.0;
    for (&t, &p) in targets.iter().zip(probs) {
        total += binary_cross_entropy(t, p)?;
    }
    Ok(total / targets.len() as f64)
}

/// `-log p[class]` over a probability vector, clamped.
pub fn cross_entropy(class: usize, probs: &Tensor) -> Result<f64> {
    let p = probs.data().get(class).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "class index {class} out of range for {} outputs",
            probs.numel()
        ))
    })?;
    Ok(-clamp_prob(*p).ln())
}

pub fn cross_entropy_grad(class: usize, probs: &Tensor) -> Result<Tensor> {
    if class >= probs.numel() {
        return Err(Error::InvalidArgument(format!(
            "class index {class} out of range for {} outputs",
            probs.numel()
        )));
    }
    let mut g = Tensor::zeros(probs.shape());
    g.data_mut()[class] = -1.0 / clamp_prob(probs.data()[class]);
    Ok(g)
}

/// Sigmoid followed by binary cross-entropy, from a single logit.
/// Returns `(loss, dloss/dlogit)`; the gradient is `sigmoid(z) - t`.
pub fn sigmoid_bce_with_logit(target: f64, logit: f64) -> Result<(f64, f64)> {
    let p = sigmoid_scalar(logit);
    Ok((binary_cross_entropy(target, p)?, p - target))
}

/// Softmax followed by cross-entropy, from logits. Gradient is `softmax(z) - onehot`.
pub fn softmax_ce_with_logits(class: usize, logits: &Tensor) -> Result<(f64, Tensor)> {
    let p = softmax(logits)?;
    let loss = cross_entropy(class, &p)?;
    let mut g = p;
    g.data_mut()[class] -= 1.0;
    Ok((loss, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn reconstruction_examples() {
        let z = Tensor::from_slice(&[1.0, 2.0, 3.0]);
        assert_eq!(reconstruction_loss(&z, &z).unwrap(), 0.0);
        let x = Tensor::from_slice(&[1.0, 0.0, 0.0]);
        let zero = Tensor::zeros(&[3]);
        assert_eq!(reconstruction_loss(&x, &zero).unwrap(), 2.0);
        let ones = Tensor::from_slice(&[1.0, 1.0]);
        let halves = Tensor::from_slice(&[0.5, 0.5]);
        assert_eq!(reconstruction_loss(&ones, &halves).unwrap(), 1.5);
        assert!(reconstruction_loss(&ones, &zero).is_err());
    }

    #[test]
    fn reconstruction_subgradient_zero_at_match() {
        let x = Tensor::from_slice(&[0.3, 0.5]);
        let g = reconstruction_loss_grad(&x, &x).unwrap();
        assert_eq!(g.data(), &[0.0, 0.0]);
    }

    #[test]
    fn bce_examples() {
        assert!((binary_cross_entropy(1.0, 0.5).unwrap() - LN_2).abs() < 1e-15);
        assert!((binary_cross_entropy(0.0, 0.5).unwrap() - LN_2).abs() < 1e-15);
        assert!(binary_cross_entropy(1.0, 1.0).unwrap() < 1e-11);
        assert!(binary_cross_entropy(1.0, 0.0).unwrap().is_finite());
        assert!(binary_cross_entropy(0.5, 0.5).is_err());
        let mean = binary_cross_entropy_mean(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert!((mean - LN_2).abs() < 1e-15);
    }

    #[test]
    fn multiclass_ce() {
        let p = Tensor::from_slice(&[0.25; 4]);
        assert!((cross_entropy(2, &p).unwrap() - 4f64.ln()).abs() < 1e-15);
        assert!(cross_entropy(4, &p).is_err());
        assert!(cross_entropy_grad(7, &p).is_err());
    }

    #[test]
    fn fused_gradients_match_composition() {
        let (loss, g) = sigmoid_bce_with_logit(1.0, 0.3).unwrap();
        let p = sigmoid_scalar(0.3);
        assert!((loss - binary_cross_entropy(1.0, p).unwrap()).abs() < 1e-15);
        let composed = binary_cross_entropy_grad(1.0, p).unwrap() * p * (1.0 - p);
        assert!((g - composed).abs() < 1e-12);
    }
}
