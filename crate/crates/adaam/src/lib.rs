//! Datasets, model files, experiments and the `adaam` command line on top of
//! [`adaam_core`].

pub mod cli;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod model_io;
pub mod report;
pub mod synth;

pub use error::{AppError, Result};
