//! INR fitting: autodiff, the MLP, Adam training and quality metrics.

pub mod adam;
pub mod autodiff;
pub mod dataset;
pub mod mlp;
pub mod psnr;
pub mod qbin;
pub mod train;

pub use dataset::{make_grid, SignalDataset};
pub use mlp::{forward, forward_binary32, MlpModel, Params, ReductionOrder};
pub use psnr::psnr;
pub use train::{train, train_with_progress, TrainConfig, TrainOutcome};
