//! Layers, losses, the Adam optimizer, and the parameter checkpoint format.

pub mod adam;
pub mod checkpoint;
pub mod layers;
pub mod loss;
pub mod sequential;

pub use adam::Adam;
pub use checkpoint::Checkpoint;
pub use layers::{AvgPool2d, CenterCrop, Conv2d, Deconv2d, Dense};
pub use sequential::{Layer, ReluMode, Sequential, Trace};
