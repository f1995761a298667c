//! Implicit neural representations with a piecewise quadratic activation.
//!
//! The crate bundles everything needed to study the quadratic activation
//! against five established INR activations:
//!
//! * [`activation`]: exact evaluation and derivatives of every activation.
//! * [`spectral`]: Fourier content of the quadratic wave and single-neuron
//!   neural tangent kernels, closed form against autodiff.
//! * [`taylor`]: minimal Taylor approximations under an error budget, the
//!   hardware-cost proxy for each activation.
//! * [`pipeline`]: the N-stage activation pipeline, its latency and resources.
//! * [`nn`]: a small reverse-mode autodiff core, MLP fitting with Adam, PSNR.
//! * [`accel`]: a cycle-stepped model of a fully pipelined INR accelerator.
//! * [`imageio`], [`report`], [`sweep`], [`cli`]: I/O and the `quadinr` tool.

pub mod accel;
pub mod activation;
pub mod cli;
mod error;
pub mod imageio;
pub mod nn;
pub mod pipeline;
pub mod reference;
pub mod report;
pub mod spectral;
pub mod sweep;
pub mod taylor;

pub use activation::{ActivationKind, Family};
pub use error::{Error, Result};
pub use pipeline::{PipelineSchedule, ResourceEstimate};
pub use taylor::TaylorSeries;

/// Version string embedded in every report.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
