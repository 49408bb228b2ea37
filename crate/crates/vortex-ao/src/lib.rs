//! Datasets, file formats, evaluation and the `vortex-ao` command line,
//! built on `vortex-ao-core`.

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod fsutil;
pub mod inspect;
pub mod keyvalue;
pub mod manifest;
pub mod pgm;
pub mod report;
pub mod train;

pub use checkpoint::Checkpoint;
pub use dataset::{generate_dataset, Dataset, GenerateConfig, Sample};
pub use error::{Error, Result};
pub use manifest::{Manifest, Split};
