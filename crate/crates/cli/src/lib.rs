//! Declarative pipeline over the inversion crates: every stage reads a TOML
//! config, writes its artifacts into one output directory and echoes the
//! resolved config there.

mod artifacts;
mod config;
mod pipeline;

pub use artifacts::{
    load_medium, load_reconstruction, save_medium, save_reconstruction, write_pgm, SavedReconstruction,
};
pub use config::{ExportFormat, OutputSection, PipelineConfig, SolverSection, ValidationSection};
pub use pipeline::{
    export, inspect, make_medium, reconstruct, simulate, validate, ValidationReport, MEDIUM_FILE, RECON_FILE,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("forward problem failed: {0}")]
    Solver(String),
    #[error("inversion failed: {0}")]
    Inversion(#[from] bcm_core::CoreError),
    #[error("validation below threshold: {0}")]
    Threshold(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Inversion(_) => 4,
            CliError::Threshold(_) => 5,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<datasets::DatasetError> for CliError {
    fn from(e: datasets::DatasetError) -> Self {
        use datasets::DatasetError as D;
        match e {
            D::Medium(_) | D::Solve { .. } | D::Caustic { .. } | D::Control(_) => CliError::Solver(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}
