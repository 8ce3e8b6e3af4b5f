//! Wavelet-manifold diffusion for stochastic human motion prediction.
//!
//! Motion clips (frames × channels) are mapped by a single-level 2-D DWT to a
//! K × 4D "wavelet manifold", a small attention denoiser is trained on that
//! representation, and futures are drawn with a guided DDIM sampler.

mod binio;
pub mod commands;
pub mod config;
pub mod data_io;
pub mod denoiser;
pub mod error;
pub mod exec;
pub mod manifold;
pub mod metrics;
pub mod plot;
pub mod sampler;
pub mod schedule;
pub mod train;
pub mod wavelet;

pub use error::{Error, Result};
pub use exec::ExecMode;
