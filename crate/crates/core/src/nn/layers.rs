//! Forward and analytic backward passes for single-sample layers.
//!
//! Image tensors are `[channels, rows, cols]`; dense tensors are `[n]`.

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::tensor::Tensor;

fn expect_rank3(x: &Tensor, what: &str) -> Result<(usize, usize, usize)> {
    match *x.shape() {
        [c, h, w] => Ok((c, h, w)),
        _ => Err(Error::InvalidArgument(format!(
            "{what} expects a [C,H,W] tensor, got {:?}",
            x.shape()
        ))),
    }
}

fn check_same_shape(a: &Tensor, b: &Tensor) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::shape(a.shape(), b.shape()));
    }
    Ok(())
}

fn he_uniform(shape: &[usize], fan_in: usize, rng: &mut Rng) -> Tensor {
    let bound = (6.0 / fan_in.max(1) as f64).sqrt();
    let mut t = Tensor::zeros(shape);
    for v in t.data_mut() {
        *v = rng.uniform_range(-bound, bound);
    }
    t
}

/// `c = a * b + beta * c` for row/column-strided `m x k` and `k x n` operands
/// and a row-major `m x n` output.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (usize, usize),
    b: &[f64],
    (rsb, csb): (usize, usize),
    c: &mut [f64],
    beta: f64,
) {
    if m == 0 || n == 0 {
        return;
    }
    let span = |rows: usize, cols: usize, rs: usize, cs: usize| (rows - 1) * rs + (cols - 1) * cs + 1;
    assert!(k == 0 || a.len() >= span(m, k, rsa, csa));
    assert!(k == 0 || b.len() >= span(k, n, rsb, csb));
    assert!(c.len() >= m * n);
    // SAFETY: the asserts above keep every strided access inside the slices.
    unsafe {
        matrixmultiply::dgemm(
            m, k, n, 1.0,
            a.as_ptr(), rsa as isize, csa as isize,
            b.as_ptr(), rsb as isize, csb as isize,
            beta,
            c.as_mut_ptr(), n as isize, 1,
        );
    }
}

/// Valid (unpadded) cross-correlation with a square kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv2d {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    /// `[out, in, k, k]`
    pub weight: Tensor,
    /// `[out]`
    pub bias: Tensor,
}

impl Conv2d {
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        rng: &mut Rng,
    ) -> Result<Self> {
        if in_channels == 0 || out_channels == 0 {
            return Err(Error::InvalidArgument("channel counts must be positive".into()));
        }
        if kernel == 0 || !(1..=2).contains(&stride) {
            return Err(Error::InvalidArgument(format!(
                "unsupported conv geometry kernel={kernel} stride={stride}"
            )));
        }
        let fan_in = in_channels * kernel * kernel;
        Ok(Conv2d {
            in_channels,
            out_channels,
            kernel,
            stride,
            weight: he_uniform(&[out_channels, in_channels, kernel, kernel], fan_in, rng),
            bias: Tensor::zeros(&[out_channels]),
        })
    }

    pub fn output_extent(&self, extent: usize) -> Option<usize> {
        (extent >= self.kernel).then(|| (extent - self.kernel) / self.stride + 1)
    }

    fn geometry(&self, x: &Tensor) -> Result<(usize, usize, usize, usize, usize)> {
        let (c, h, w) = expect_rank3(x, "conv2d")?;
        if c != self.in_channels {
            return Err(Error::shape(&[self.in_channels, h, w], x.shape()));
        }
        match (self.output_extent(h), self.output_extent(w)) {
            (Some(ho), Some(wo)) => Ok((c, h, w, ho, wo)),
            _ => Err(Error::InvalidArgument(format!(
                "input {h}x{w} is smaller than the {k}x{k} kernel",
                k = self.kernel
            ))),
        }
    }

    /// Unfolds `x` into a `[cin*k*k, ho*wo]` patch matrix.
    fn im2col(&self, xd: &[f64], cin: usize, h: usize, w: usize, ho: usize, wo: usize) -> Vec<f64> {
        let (k, s) = (self.kernel, self.stride);
        let mut cols = Vec::with_capacity(cin * k * k * ho * wo);
        for c in 0..cin {
            let xc = &xd[c * h * w..(c + 1) * h * w];
            for di in 0..k {
                for dj in 0..k {
                    for i in 0..ho {
                        let src = &xc[(i * s + di) * w + dj..];
                        if s == 1 {
                            cols.extend_from_slice(&src[..wo]);
                        } else {
                            cols.extend(src.iter().step_by(s).take(wo));
                        }
                    }
                }
            }
        }
        cols
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let (cin, h, w, ho, wo) = self.geometry(x)?;
        let p = ho * wo;
        let kk = cin * self.kernel * self.kernel;
        let unfolded;
        let cols: &[f64] = if self.kernel == 1 && self.stride == 1 {
            x.data()
        } else {
            unfolded = self.im2col(x.data(), cin, h, w, ho, wo);
            &unfolded
        };
        let mut y = Vec::with_capacity(self.out_channels * p);
        for &b in self.bias.data() {
            y.extend(std::iter::repeat_n(b, p));
        }
        gemm(self.out_channels, kk, p, self.weight.data(), (kk, 1), cols, (p, 1), &mut y, 1.0);
        Tensor::new(vec![self.out_channels, ho, wo], y)
    }

    /// Adds parameter gradients into `gw`/`gb`; returns dL/dx when asked.
    pub fn backward_into(
        &self,
        x: &Tensor,
        dy: &Tensor,
        gw: &mut Tensor,
        gb: &mut Tensor,
        want_dx: bool,
    ) -> Result<Option<Tensor>> {
        let (cin, h, w, ho, wo) = self.geometry(x)?;
        if dy.shape() != [self.out_channels, ho, wo] {
            return Err(Error::shape(&[self.out_channels, ho, wo], dy.shape()));
        }
        let (k, s) = (self.kernel, self.stride);
        let p = ho * wo;
        let kk = cin * k * k;
        let dyd = dy.data();
        for (o, g) in gb.data_mut().iter_mut().enumerate() {
            *g += dyd[o * p..(o + 1) * p].iter().sum::<f64>();
        }
        let pointwise = k == 1 && s == 1;
        let unfolded;
        let cols: &[f64] = if pointwise {
            x.data()
        } else {
            unfolded = self.im2col(x.data(), cin, h, w, ho, wo);
            &unfolded
        };
        // gw[o, r] += sum_p dy[o, p] * cols[r, p]
        gemm(self.out_channels, p, kk, dyd, (p, 1), cols, (1, p), gw.data_mut(), 1.0);
        if !want_dx {
            return Ok(None);
        }
        let wd = self.weight.data();
        if pointwise {
            // dx[c, p] = sum_o w[o, c] * dy[o, p]
            let mut dx = Vec::with_capacity(kk * p);
            dx.resize(kk * p, 0.0);
            gemm(kk, self.out_channels, p, wd, (1, kk), dyd, (p, 1), &mut dx, 0.0);
            return Ok(Some(Tensor::new(vec![cin, h, w], dx)?));
        }
        let mut dx = vec![0.0; cin * h * w];
        let mut row = vec![0.0; p];
        for c in 0..cin {
            let dxc = &mut dx[c * h * w..(c + 1) * h * w];
            for di in 0..k {
                for dj in 0..k {
                    // row[p] = sum_o w[o, r] * dy[o, p] for patch row r = (c, di, dj)
                    let r = (c * k + di) * k + dj;
                    row.fill(0.0);
                    for o in 0..self.out_channels {
                        let wv = wd[o * kk + r];
                        for (acc, g) in row.iter_mut().zip(&dyd[o * p..(o + 1) * p]) {
                            *acc += wv * g;
                        }
                    }
                    for i in 0..ho {
                        let src = &row[i * wo..(i + 1) * wo];
                        let base = (i * s + di) * w + dj;
                        if s == 1 {
                            for (d, g) in dxc[base..base + wo].iter_mut().zip(src) {
                                *d += g;
                            }
                        } else {
                            for (j, g) in src.iter().enumerate() {
                                dxc[base + j * s] += g;
                            }
                        }
                    }
                }
            }
        }
        Ok(Some(Tensor::new(vec![cin, h, w], dx)?))
    }

    /// Returns `(dx, dw, db)`.
    pub fn backward(&self, x: &Tensor, dy: &Tensor) -> Result<(Tensor, Tensor, Tensor)> {
        let mut gw = Tensor::zeros(self.weight.shape());
        let mut gb = Tensor::zeros(self.bias.shape());
        let dx = self.backward_into(x, dy, &mut gw, &mut gb, true)?.expect("dx requested");
        Ok((dx, gw, gb))
    }
}

/// Transposed convolution. With kernel 2 and stride 2 every input pixel
/// scatters into a disjoint 2x2 output block, doubling both extents.
#[derive(Debug, Clone, PartialEq)]
pub struct Deconv2d {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    /// `[in, out, k, k]`
    pub weight: Tensor,
    /// `[out]`
    pub bias: Tensor,
}

impl Deconv2d {
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        rng: &mut Rng,
    ) -> Result<Self> {
        if stride != 2 {
            return Err(Error::InvalidArgument(format!(
                "transposed convolution requires stride 2, got {stride}"
            )));
        }
        if kernel != 2 {
            return Err(Error::InvalidArgument(format!(
                "transposed convolution requires a 2x2 kernel, got {kernel}x{kernel}"
            )));
        }
        if in_channels == 0 || out_channels == 0 {
            return Err(Error::InvalidArgument("channel counts must be positive".into()));
        }
        Ok(Deconv2d {
            in_channels,
            out_channels,
            kernel,
            stride,
            weight: he_uniform(&[in_channels, out_channels, kernel, kernel], in_channels, rng),
            bias: Tensor::zeros(&[out_channels]),
        })
    }

    pub fn output_extent(&self, extent: usize) -> usize {
        (extent - 1) * self.stride + self.kernel
    }

    fn geometry(&self, x: &Tensor) -> Result<(usize, usize, usize)> {
        let (c, h, w) = expect_rank3(x, "deconv2d")?;
        if c != self.in_channels {
            return Err(Error::shape(&[self.in_channels, h, w], x.shape()));
        }
        Ok((c, h, w))
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let (cin, h, w) = self.geometry(x)?;
        let (k, s) = (self.kernel, self.stride);
        let (ho, wo) = (self.output_extent(h), self.output_extent(w));
        let xd = x.data();
        let wd = self.weight.data();
        let mut y = vec![0.0; self.out_channels * ho * wo];
        for o in 0..self.out_channels {
            let yo = &mut y[o * ho * wo..(o + 1) * ho * wo];
            yo.fill(self.bias.data()[o]);
            for c in 0..cin {
                let xc = &xd[c * h * w..(c + 1) * h * w];
                for di in 0..k {
                    for dj in 0..k {
                        let wv = wd[((c * self.out_channels + o) * k + di) * k + dj];
                        for i in 0..h {
                            let yrow = &mut yo[(i * s + di) * wo..(i * s + di + 1) * wo];
                            for (j, xv) in xc[i * w..(i + 1) * w].iter().enumerate() {
                                yrow[j * s + dj] += wv * xv;
                            }
                        }
                    }
                }
            }
        }
        Tensor::new(vec![self.out_channels, ho, wo], y)
    }

    pub fn backward_into(
        &self,
        x: &Tensor,
        dy: &Tensor,
        gw: &mut Tensor,
        gb: &mut Tensor,
        want_dx: bool,
    ) -> Result<Option<Tensor>> {
        let (cin, h, w) = self.geometry(x)?;
        let (k, s) = (self.kernel, self.stride);
        let (ho, wo) = (self.output_extent(h), self.output_extent(w));
        if dy.shape() != [self.out_channels, ho, wo] {
            return Err(Error::shape(&[self.out_channels, ho, wo], dy.shape()));
        }
        let xd = x.data();
        let dyd = dy.data();
        let wd = self.weight.data();
        let mut dx = if want_dx { vec![0.0; cin * h * w] } else { Vec::new() };
        for o in 0..self.out_channels {
            let dyo = &dyd[o * ho * wo..(o + 1) * ho * wo];
            gb.data_mut()[o] += dyo.iter().sum::<f64>();
        }
        let gw = gw.data_mut();
        for c in 0..cin {
            let xc = &xd[c * h * w..(c + 1) * h * w];
            for o in 0..self.out_channels {
                let dyo = &dyd[o * ho * wo..(o + 1) * ho * wo];
                for di in 0..k {
                    for dj in 0..k {
                        let widx = ((c * self.out_channels + o) * k + di) * k + dj;
                        let wv = wd[widx];
                        let mut acc = 0.0;
                        for i in 0..h {
                            let dyrow = &dyo[(i * s + di) * wo..(i * s + di + 1) * wo];
                            for j in 0..w {
                                let g = dyrow[j * s + dj];
                                acc += xc[i * w + j] * g;
                                if want_dx {
                                    dx[c * h * w + i * w + j] += wv * g;
                                }
                            }
                        }
                        gw[widx] += acc;
                    }
                }
            }
        }
        if want_dx {
            Ok(Some(Tensor::new(vec![cin, h, w], dx)?))
        } else {
            Ok(None)
        }
    }

    pub fn backward(&self, x: &Tensor, dy: &Tensor) -> Result<(Tensor, Tensor, Tensor)> {
        let mut gw = Tensor::zeros(self.weight.shape());
        let mut gb = Tensor::zeros(self.bias.shape());
        let dx = self.backward_into(x, dy, &mut gw, &mut gb, true)?.expect("dx requested");
        Ok((dx, gw, gb))
    }
}

/// Average pooling over square windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AvgPool2d {
    pub kernel: usize,
    pub stride: usize,
}

impl Default for AvgPool2d {
    fn default() -> Self {
        AvgPool2d { kernel: 2, stride: 1 }
    }
}

impl AvgPool2d {
    pub fn output_extent(&self, extent: usize) -> Option<usize> {
        (extent >= self.kernel).then(|| (extent - self.kernel) / self.stride + 1)
    }

    fn geometry(&self, x: &Tensor) -> Result<(usize, usize, usize, usize, usize)> {
        let (c, h, w) = expect_rank3(x, "avgpool2d")?;
        match (self.output_extent(h), self.output_extent(w)) {
            (Some(ho), Some(wo)) => Ok((c, h, w, ho, wo)),
            _ => Err(Error::InvalidArgument(format!(
                "input {h}x{w} is smaller than the {k}x{k} pooling window",
                k = self.kernel
            ))),
        }
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let (c, h, w, ho, wo) = self.geometry(x)?;
        let (k, s) = (self.kernel, self.stride);
        let norm = 1.0 / (k * k) as f64;
        let xd = x.data();
        let mut y = vec![0.0; c * ho * wo];
        for ch in 0..c {
            let xc = &xd[ch * h * w..(ch + 1) * h * w];
            let yc = &mut y[ch * ho * wo..(ch + 1) * ho * wo];
            for i in 0..ho {
                let yrow = &mut yc[i * wo..(i + 1) * wo];
                for di in 0..k {
                    let xrow = &xc[(i * s + di) * w..(i * s + di + 1) * w];
                    for dj in 0..k {
                        if s == 1 {
                            for (yv, xv) in yrow.iter_mut().zip(&xrow[dj..dj + wo]) {
                                *yv += xv;
                            }
                        } else {
                            for (j, yv) in yrow.iter_mut().enumerate() {
                                *yv += xrow[j * s + dj];
                            }
                        }
                    }
                }
                for yv in yrow.iter_mut() {
                    *yv *= norm;
                }
            }
        }
        Tensor::new(vec![c, ho, wo], y)
    }

    pub fn backward(&self, x: &Tensor, dy: &Tensor) -> Result<Tensor> {
        let (c, h, w, ho, wo) = self.geometry(x)?;
        if dy.shape() != [c, ho, wo] {
            return Err(Error::shape(&[c, ho, wo], dy.shape()));
        }
        let (k, s) = (self.kernel, self.stride);
        let norm = 1.0 / (k * k) as f64;
        let dyd = dy.data();
        let mut dx = vec![0.0; c * h * w];
        for ch in 0..c {
            let dyc = &dyd[ch * ho * wo..(ch + 1) * ho * wo];
            let dxc = &mut dx[ch * h * w..(ch + 1) * h * w];
            for i in 0..ho {
                let dyrow = &dyc[i * wo..(i + 1) * wo];
                for di in 0..k {
                    let dxrow = &mut dxc[(i * s + di) * w..(i * s + di + 1) * w];
                    for dj in 0..k {
                        if s == 1 {
                            for (d, g) in dxrow[dj..dj + wo].iter_mut().zip(dyrow) {
                                *d += g * norm;
                            }
                        } else {
                            for (j, g) in dyrow.iter().enumerate() {
                                dxrow[j * s + dj] += g * norm;
                            }
                        }
                    }
                }
            }
        }
        Tensor::new(vec![c, h, w], dx)
    }
}

/// `[C,H,W] -> [C]` channel means.
pub fn global_avg_pool(x: &Tensor) -> Result<Tensor> {
    let (c, h, w) = expect_rank3(x, "global_avg_pool")?;
    let n = (h * w) as f64;
    let data = x
        .data()
        .chunks_exact(h * w)
        .map(|ch| ch.iter().sum::<f64>() / n)
        .collect();
    Tensor::new(vec![c], data)
}

pub fn global_avg_pool_backward(x: &Tensor, dy: &Tensor) -> Result<Tensor> {
    let (c, h, w) = expect_rank3(x, "global_avg_pool")?;
    if dy.shape() != [c] {
        return Err(Error::shape(&[c], dy.shape()));
    }
    let n = (h * w) as f64;
    let mut dx = Vec::with_capacity(c * h * w);
    for &g in dy.data() {
        dx.extend(std::iter::repeat_n(g / n, h * w));
    }
    Tensor::new(vec![c, h, w], dx)
}

/// Fully connected layer `y = W x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// `[out, in]`
    pub weight: Tensor,
    /// `[out]`
    pub bias: Tensor,
}

impl Dense {
    pub fn new(inputs: usize, outputs: usize, rng: &mut Rng) -> Result<Self> {
        if inputs == 0 || outputs == 0 {
            return Err(Error::InvalidArgument("dense extents must be positive".into()));
        }
        Ok(Dense {
            weight: he_uniform(&[outputs, inputs], inputs, rng),
            bias: Tensor::zeros(&[outputs]),
        })
    }

    pub fn inputs(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn outputs(&self) -> usize {
        self.weight.shape()[0]
    }

    fn check_input(&self, x: &Tensor) -> Result<()> {
        if x.shape() != [self.inputs()] {
            return Err(Error::shape(&[self.inputs()], x.shape()));
        }
        Ok(())
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        self.check_input(x)?;
        let n = self.inputs();
        let y = self
            .weight
            .data()
            .chunks_exact(n)
            .zip(self.bias.data())
            .map(|(row, b)| b + row.iter().zip(x.data()).map(|(w, v)| w * v).sum::<f64>())
            .collect();
        Tensor::new(vec![self.outputs()], y)
    }

    pub fn backward_into(
        &self,
        x: &Tensor,
        dy: &Tensor,
        gw: &mut Tensor,
        gb: &mut Tensor,
        want_dx: bool,
    ) -> Result<Option<Tensor>> {
        self.check_input(x)?;
        if dy.shape() != [self.outputs()] {
            return Err(Error::shape(&[self.outputs()], dy.shape()));
        }
        let n = self.inputs();
        let mut dx = vec![0.0; n];
        for (o, &g) in dy.data().iter().enumerate() {
            gb.data_mut()[o] += g;
            let gwr = &mut gw.data_mut()[o * n..(o + 1) * n];
            for (gwv, xv) in gwr.iter_mut().zip(x.data()) {
                *gwv += g * xv;
            }
            if want_dx {
                for (d, w) in dx.iter_mut().zip(&self.weight.data()[o * n..(o + 1) * n]) {
                    *d += g * w;
                }
            }
        }
        if want_dx {
            Ok(Some(Tensor::new(vec![n], dx)?))
        } else {
            Ok(None)
        }
    }

    pub fn backward(&self, x: &Tensor, dy: &Tensor) -> Result<(Tensor, Tensor, Tensor)> {
        let mut gw = Tensor::zeros(self.weight.shape());
        let mut gb = Tensor::zeros(self.bias.shape());
        let dx = self.backward_into(x, dy, &mut gw, &mut gb, true)?.expect("dx requested");
        Ok((dx, gw, gb))
    }
}

pub fn relu(x: &Tensor) -> Tensor {
    let mut y = x.clone();
    for v in y.data_mut() {
        *v = v.max(0.0);
    }
    y
}

/// Standard ReLU backward; the derivative at exactly 0 is taken as 0.
pub fn relu_backward(x: &Tensor, dy: &Tensor) -> Result<Tensor> {
    check_same_shape(x, dy)?;
    let mut dx = dy.clone();
    for (d, &xv) in dx.data_mut().iter_mut().zip(x.data()) {
        if xv <= 0.0 {
            *d = 0.0;
        }
    }
    Ok(dx)
}

/// Guided-backpropagation ReLU: passes only positive gradients at positive inputs.
pub fn relu_backward_guided(x: &Tensor, dy: &Tensor) -> Result<Tensor> {
    check_same_shape(x, dy)?;
    let mut dx = dy.clone();
    for (d, &xv) in dx.data_mut().iter_mut().zip(x.data()) {
        if xv <= 0.0 || *d <= 0.0 {
            *d = 0.0;
        }
    }
    Ok(dx)
}

#[inline]
pub fn sigmoid_scalar(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn sigmoid(x: &Tensor) -> Tensor {
    let mut y = x.clone();
    for v in y.data_mut() {
        *v = sigmoid_scalar(*v);
    }
    y
}

/// Backward through sigmoid given its output `y`.
pub fn sigmoid_backward(y: &Tensor, dy: &Tensor) -> Result<Tensor> {
    check_same_shape(y, dy)?;
    let mut dx = dy.clone();
    for (d, &yv) in dx.data_mut().iter_mut().zip(y.data()) {
        *d *= yv * (1.0 - yv);
    }
    Ok(dx)
}

/// Max-subtracted softmax over a 1-D tensor.
pub fn softmax(x: &Tensor) -> Result<Tensor> {
    if x.rank() != 1 {
        return Err(Error::InvalidArgument(format!(
            "softmax expects a 1-D tensor, got {:?}",
            x.shape()
        )));
    }
    let max = x.data().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = x.data().iter().map(|v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Tensor::new(x.shape().to_vec(), exps.into_iter().map(|e| e / total).collect())
}

/// Backward through softmax given its output `p`: `dx = p * (dy - <dy, p>)`.
pub fn softmax_backward(p: &Tensor, dy: &Tensor) -> Result<Tensor> {
    check_same_shape(p, dy)?;
    let dot: f64 = p.data().iter().zip(dy.data()).map(|(a, b)| a * b).sum();
    let dx = p
        .data()
        .iter()
        .zip(dy.data())
        .map(|(pv, g)| pv * (g - dot))
        .collect();
    Tensor::new(p.shape().to_vec(), dx)
}

/// Centered crop of the two spatial axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CenterCrop {
    pub rows: usize,
    pub cols: usize,
}

impl CenterCrop {
    fn offsets(&self, h: usize, w: usize) -> Result<(usize, usize)> {
        if h < self.rows || w < self.cols {
            return Err(Error::InvalidArgument(format!(
                "cannot crop {h}x{w} to {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(((h - self.rows) / 2, (w - self.cols) / 2))
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let (c, h, w) = expect_rank3(x, "center_crop")?;
        let (r0, c0) = self.offsets(h, w)?;
        let mut y = Vec::with_capacity(c * self.rows * self.cols);
        for ch in 0..c {
            for r in 0..self.rows {
                let start = ch * h * w + (r0 + r) * w + c0;
                y.extend_from_slice(&x.data()[start..start + self.cols]);
            }
        }
        Tensor::new(vec![c, self.rows, self.cols], y)
    }

    pub fn backward(&self, x: &Tensor, dy: &Tensor) -> Result<Tensor> {
        let (c, h, w) = expect_rank3(x, "center_crop")?;
        if dy.shape() != [c, self.rows, self.cols] {
            return Err(Error::shape(&[c, self.rows, self.cols], dy.shape()));
        }
        let (r0, c0) = self.offsets(h, w)?;
        let mut dx = vec![0.0; c * h * w];
        for ch in 0..c {
            for r in 0..self.rows {
                let dst = ch * h * w + (r0 + r) * w + c0;
                let src = (ch * self.rows + r) * self.cols;
                dx[dst..dst + self.cols].copy_from_slice(&dy.data()[src..src + self.cols]);
            }
        }
        Tensor::new(vec![c, h, w], dx)
    }
}
