//! A feed-forward stack of layers with a recorded forward trace.

use crate::error::{Error, Result};
use crate::nn::layers::{
    global_avg_pool, global_avg_pool_backward, relu, relu_backward, relu_backward_guided, sigmoid,
    sigmoid_backward, AvgPool2d, CenterCrop, Conv2d, Deconv2d, Dense,
};
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Conv(Conv2d),
    Deconv(Deconv2d),
    AvgPool(AvgPool2d),
    Relu,
    Sigmoid,
    GlobalAvgPool,
    Dense(Dense),
    Crop(CenterCrop),
}

/// How ReLU layers route gradients backward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReluMode {
    Standard,
    /// Guided backpropagation: also zero negative incoming gradients.
    Guided,
}

impl Layer {
    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        match self {
            Layer::Conv(c) => c.forward(x),
            Layer::Deconv(d) => d.forward(x),
            Layer::AvgPool(p) => p.forward(x),
            Layer::Relu => Ok(relu(x)),
            Layer::Sigmoid => Ok(sigmoid(x)),
            Layer::GlobalAvgPool => global_avg_pool(x),
            Layer::Dense(d) => d.forward(x),
            Layer::Crop(c) => c.forward(x),
        }
    }

    pub fn params(&self) -> Vec<&Tensor> {
        match self {
            Layer::Conv(c) => vec![&c.weight, &c.bias],
            Layer::Deconv(d) => vec![&d.weight, &d.bias],
            Layer::Dense(d) => vec![&d.weight, &d.bias],
            _ => Vec::new(),
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        match self {
            Layer::Conv(c) => vec![&mut c.weight, &mut c.bias],
            Layer::Deconv(d) => vec![&mut d.weight, &mut d.bias],
            Layer::Dense(d) => vec![&mut d.weight, &mut d.bias],
            _ => Vec::new(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Layer::Conv(_) => "conv",
            Layer::Deconv(_) => "deconv",
            Layer::AvgPool(_) => "avgpool",
            Layer::Relu => "relu",
            Layer::Sigmoid => "sigmoid",
            Layer::GlobalAvgPool => "gap",
            Layer::Dense(_) => "dense",
            Layer::Crop(_) => "crop",
        }
    }
}

/// Activations recorded by [`Sequential::trace`]: `acts[0]` is the input and
/// `acts[i + 1]` the output of layer `i`.
#[derive(Debug, Clone)]
pub struct Trace {
    pub acts: Vec<Tensor>,
}

impl Trace {
    pub fn output(&self) -> &Tensor {
        self.acts.last().expect("trace holds the input at least")
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Sequential {
    layers: Vec<Layer>,
}

impl Sequential {
    pub fn new(layers: Vec<Layer>) -> Self {
        Sequential { layers }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn push(&mut self, layer: Layer) {
        self.layers.push(layer);
    }

    pub fn extend(&mut self, other: Sequential) {
        self.layers.extend(other.layers);
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let mut cur = x.clone();
        for layer in &self.layers {
            cur = layer.forward(&cur)?;
        }
        Ok(cur)
    }

    pub fn trace(&self, x: &Tensor) -> Result<Trace> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.clone());
        for layer in &self.layers {
            let next = layer.forward(acts.last().expect("non-empty"))?;
            acts.push(next);
        }
        Ok(Trace { acts })
    }

    pub fn params(&self) -> Vec<&Tensor> {
        self.layers.iter().flat_map(Layer::params).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        self.layers.iter_mut().flat_map(Layer::params_mut).collect()
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.numel()).sum()
    }

    /// Zeroed gradient buffers aligned with [`Sequential::params`].
    pub fn zero_grads(&self) -> Vec<Tensor> {
        self.params()
            .into_iter()
            .map(|p| Tensor::zeros(p.shape()))
            .collect()
    }

    /// Index of each parameterized layer's first tensor in the flat parameter list.
    fn param_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.layers.len());
        let mut at = 0;
        for l in &self.layers {
            offsets.push(at);
            at += l.params().len();
        }
        offsets
    }

    /// Backpropagates `dy` (gradient at the trace output) down to activation
    /// `acts[stop]`, adding parameter gradients of layers `stop..` into
    /// `grads` when given. Returns the gradient at `acts[stop]`, or `None`
    /// when `stop == 0` and `want_input_grad` is false.
    pub fn backward(
        &self,
        trace: &Trace,
        dy: &Tensor,
        mut grads: Option<&mut [Tensor]>,
        mode: ReluMode,
        stop: usize,
        want_input_grad: bool,
    ) -> Result<Option<Tensor>> {
        if trace.acts.len() != self.layers.len() + 1 {
            return Err(Error::InvalidArgument(format!(
                "trace of {} activations for {} layers",
                trace.acts.len(),
                self.layers.len()
            )));
        }
        if stop > self.layers.len() {
            return Err(Error::InvalidArgument(format!(
                "stop index {stop} beyond {} layers",
                self.layers.len()
            )));
        }
        if let Some(g) = grads.as_deref() {
            let expected = self.params().len();
            if g.len() != expected {
                return Err(Error::InvalidArgument(format!(
                    "{} gradient buffers for {expected} parameter tensors",
                    g.len()
                )));
            }
        }
        if dy.shape() != trace.output().shape() {
            return Err(Error::shape(trace.output().shape(), dy.shape()));
        }
        let offsets = self.param_offsets();
        let mut cur = dy.clone();
        for idx in (stop..self.layers.len()).rev() {
            let x = &trace.acts[idx];
            let need_dx = idx > stop || want_input_grad || stop > 0;
            let next = match &self.layers[idx] {
                Layer::Conv(c) => {
                    param_backward(&mut grads, offsets[idx], |gw, gb| {
                        c.backward_into(x, &cur, gw, gb, need_dx)
                    }, || {
                        need_dx.then(|| c.backward(x, &cur).map(|r| r.0)).transpose()
                    })?
                }
                Layer::Deconv(d) => {
                    param_backward(&mut grads, offsets[idx], |gw, gb| {
                        d.backward_into(x, &cur, gw, gb, need_dx)
                    }, || {
                        need_dx.then(|| d.backward(x, &cur).map(|r| r.0)).transpose()
                    })?
                }
                Layer::Dense(d) => {
                    param_backward(&mut grads, offsets[idx], |gw, gb| {
                        d.backward_into(x, &cur, gw, gb, need_dx)
                    }, || {
                        need_dx.then(|| d.backward(x, &cur).map(|r| r.0)).transpose()
                    })?
                }
                Layer::AvgPool(p) => Some(p.backward(x, &cur)?),
                Layer::Relu => Some(match mode {
                    ReluMode::Standard => relu_backward(x, &cur)?,
                    ReluMode::Guided => relu_backward_guided(x, &cur)?,
                }),
                Layer::Sigmoid => Some(sigmoid_backward(&trace.acts[idx + 1], &cur)?),
                Layer::GlobalAvgPool => Some(global_avg_pool_backward(x, &cur)?),
                Layer::Crop(c) => Some(c.backward(x, &cur)?),
            };
            match next {
                Some(t) => cur = t,
                None => return Ok(None),
            }
        }
        Ok(Some(cur))
    }
}

fn param_backward(
    grads: &mut Option<&mut [Tensor]>,
    offset: usize,
    with_grads: impl FnOnce(&mut Tensor, &mut Tensor) -> Result<Option<Tensor>>,
    input_only: impl FnOnce() -> Result<Option<Tensor>>,
) -> Result<Option<Tensor>> {
    match grads {
        Some(g) => {
            let (head, tail) = g.split_at_mut(offset + 1);
            with_grads(&mut head[offset], &mut tail[0])
        }
        None => input_only(),
    }
}
