//! Score-based oversampling for imbalanced tabular data: per-class diffusion
//! models trained by denoising score matching, gradient-angle fine-tuning,
//! boundary (style-transfer) and regular (prior-noise) oversampling, and a
//! weighted-F1 evaluation harness.

pub mod cli;
pub mod config;
pub mod error;
pub mod eval;
pub mod finetune;
pub mod model_io;
pub mod pipeline;
pub mod sampling;
pub mod scorenet;
pub mod sde;
pub mod synth;
pub mod tabular;
pub mod training;

pub use error::{Result, SosError};
