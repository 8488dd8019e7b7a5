//! Two-stage texture classifier for B-mode ultrasound burn-depth images.
//!
//! A convolutional encoder-decoder is first trained to map burned-skin
//! images onto randomly chosen unburned-skin images. Its encoder is then
//! re-trained, with a global-average-pooling head, as a burn-depth
//! classifier. The crate also carries the engineered-texture baselines
//! (GLCM features with LDA and an RBF SVM), the evaluation and trust
//! metrics, guided Grad-CAM++ explanations, and a synthetic speckle
//! phantom generator so every stage runs without the original scans.

pub mod data;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod gradcheck;
pub mod model;
pub mod nn;
pub mod rng;
pub mod saliency;
pub mod tensor;
pub mod texture;

pub use error::{Error, Result};
pub use rng::Rng;
pub use tensor::Tensor;
