//! Boundary measurements for a basis of controls: the response traces, the
//! integrated-control generator traces, and an optional interior oracle block.
//!
//! Traces of shifted controls are never stored. The medium is time-invariant, so
//! the trace of `f(t - s)` is the trace of `f` delayed by `s`, and every basis
//! control is a delay of the first temporal tent.

mod build;
mod dataset;
mod format;

pub use build::{build_dataset, BuildOptions};
pub use dataset::{shift_columns, Manifest, OracleBlock, TraceDataset, FORMAT_VERSION};
pub use format::{
    load_dataset, load_manifest, read_container, read_dataset, read_manifest, save_dataset, write_container, write_dataset,
    Container,
};

use controls::ControlError;
use medium_geometry::MediumError;
use wavefield::WaveError;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error(transparent)]
    Medium(#[from] MediumError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error("forward solve for {control} failed: {source}")]
    Solve { control: String, source: WaveError },
    #[error("scenario is not regular: caustic near gamma = {gamma}, xi = {xi}")]
    Caustic { gamma: f64, xi: f64 },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed dataset: {0}")]
    Format(String),
    #[error("unsupported dataset version {found}, expected {expected}")]
    Version { found: u32, expected: u32 },
    #[error("checksum mismatch in block {block}")]
    Checksum { block: String },
    #[error("dataset truncated while reading {0}")]
    Truncated(String),
    #[error("dataset does not match the configuration: {0}")]
    Mismatch(String),
}
