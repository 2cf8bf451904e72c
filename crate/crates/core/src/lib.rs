//! High-frequency-first training for image implicit neural representations.
//!
//! A coordinate MLP (SIREN or FINER backbone) is fitted to an image in two
//! stages. Stage one minimizes a reconstruction loss weighted by a
//! neighbor-aware soft mask that highlights pixels with strong local
//! variation; stage two switches to plain full-image MSE with the same
//! network and optimizer state.
//!
//! Modules:
//!
//! - [`imageio`]: PNG/PGM/PPM loading, PNG saving, grayscale conversion, resizing.
//! - [`maskgen`]: max-neighbor-difference maps and the sigmoid soft mask.
//! - [`net`]: the MLP, exact reverse-mode gradients, Adam, checkpoints.
//! - [`metrics`]: MSE, PSNR, SSIM and region-wise PSNR.
//! - [`trainer`]: coordinate grids and the two-stage fitting loop.
//! - [`harness`]: experiment specs, fit/ablation/eval drivers, CSV reports.
//!
//! The `examples/` directory holds one runnable program per capability.

pub mod error;
pub mod harness;
pub mod imageio;
pub mod maskgen;
pub mod metrics;
pub mod net;
pub mod synth;
pub mod trainer;

pub use error::{Error, Result};
pub use imageio::Image;
pub use maskgen::{DiffMap, MaskConfig, Padding, SoftMask};
pub use metrics::{Psnr, RegionReport, SsimConfig};
pub use net::{Activation, AdamState, CoordBatch, Gradients, MlpParams};
pub use trainer::{Backbone, Stage, TrainConfig, TrainResult};
