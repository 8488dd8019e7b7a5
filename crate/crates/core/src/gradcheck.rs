//! Central finite-difference check for analytic gradients.

use crate::error::{Error, Result};
use crate::nn::{Layer, Sequential};
use crate::tensor::Tensor;

/// A map from a tensor to a scalar with an analytic gradient.
pub trait DifferentiableMap {
    /// Must return a single-element tensor.
    fn forward(&self, x: &Tensor) -> Result<Tensor>;
    /// dL/dx at `x`, shaped like `x`.
    fn backward(&self, x: &Tensor) -> Result<Tensor>;
}

/// Adapter turning two closures into a [`DifferentiableMap`].
pub struct FnMap<F, G> {
    pub forward: F,
    pub backward: G,
}

impl<F, G> DifferentiableMap for FnMap<F, G>
where
    F: Fn(&Tensor) -> Result<Tensor>,
    G: Fn(&Tensor) -> Result<Tensor>,
{
    fn forward(&self, x: &Tensor) -> Result<Tensor> {
        (self.forward)(x)
    }
    fn backward(&self, x: &Tensor) -> Result<Tensor> {
        (self.backward)(x)
    }
}

fn scalar_of(t: &Tensor) -> Result<f64> {
    if t.numel() != 1 {
        return Err(Error::InvalidArgument(format!(
            "gradient check needs a scalar output, got shape {:?}",
            t.shape()
        )));
    }
    Ok(t.data()[0])
}

/// Max over coordinates of `|analytic - central difference| / max(1, |analytic|)`.
pub fn grad_check(f: &dyn DifferentiableMap, x: &Tensor, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    scalar_of(&f.forward(x)?)?;
    let analytic = f.backward(x)?;
    if analytic.shape() != x.shape() {
        return Err(Error::shape(x.shape(), analytic.shape()));
    }
    let mut probe = x.clone();
    let mut worst = 0.0f64;
    for i in 0..x.numel() {
        let orig = x.data()[i];
        probe.data_mut()[i] = orig + eps;
        let up = scalar_of(&f.forward(&probe)?)?;
        probe.data_mut()[i] = orig - eps;
        let down = scalar_of(&f.forward(&probe)?)?;
        probe.data_mut()[i] = orig;
        let numeric = (up - down) / (2.0 * eps);
        let a = analytic.data()[i];
        worst = worst.max((a - numeric).abs() / a.abs().max(1.0));
    }
    Ok(worst)
}

/// Outcome of [`grad_check_piecewise`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiecewiseCheck {
    /// Worst relative error over the coordinates that were compared.
    pub worst: f64,
    pub compared: usize,
    /// Coordinates whose probes straddled a kink.
    pub skipped: usize,
}

/// [`grad_check`] for piecewise-smooth maps. `regime(x)` labels the smooth
/// piece containing `x`; a coordinate is skipped when its `+eps` and `-eps`
/// probes land in different pieces, since the central difference there
/// measures a kink rather than the derivative.
pub fn grad_check_piecewise(
    f: &dyn DifferentiableMap,
    x: &Tensor,
    eps: f64,
    regime: &dyn Fn(&Tensor) -> Result<Vec<bool>>,
) -> Result<PiecewiseCheck> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    scalar_of(&f.forward(x)?)?;
    let analytic = f.backward(x)?;
    if analytic.shape() != x.shape() {
        return Err(Error::shape(x.shape(), analytic.shape()));
    }
    let mut probe = x.clone();
    let mut out = PiecewiseCheck { worst: 0.0, compared: 0, skipped: 0 };
    for i in 0..x.numel() {
        let orig = x.data()[i];
        probe.data_mut()[i] = orig + eps;
        let up = scalar_of(&f.forward(&probe)?)?;
        let up_regime = regime(&probe)?;
        probe.data_mut()[i] = orig - eps;
        let down = scalar_of(&f.forward(&probe)?)?;
        let down_regime = regime(&probe)?;
        probe.data_mut()[i] = orig;
        if up_regime != down_regime {
            out.skipped += 1;
            continue;
        }
        let numeric = (up - down) / (2.0 * eps);
        let a = analytic.data()[i];
        out.worst = out.worst.max((a - numeric).abs() / a.abs().max(1.0));
        out.compared += 1;
    }
    Ok(out)
}

/// Signs of every ReLU input in `net` at `x`: the linear region of a ReLU
/// network.
pub fn relu_pattern(net: &Sequential, x: &Tensor) -> Result<Vec<bool>> {
    let trace = net.trace(x)?;
    Ok(net
        .layers()
        .iter()
        .enumerate()
        .filter(|(_, l)| matches!(l, Layer::Relu))
        .flat_map(|(i, _)| trace.acts[i].data().iter().map(|&v| v > 0.0).collect::<Vec<_>>())
        .collect())
}
