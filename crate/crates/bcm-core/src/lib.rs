//! Inversion from boundary traces: Gram matrices and harmonic right-hand sides,
//! regularized solves, amplitude images, and recovery of the ray-coordinate map
//! and of the sound speed.

mod assembly;
mod image;
mod linalg;
mod recon;
pub mod validate;

pub use assembly::{assemble, Assembly, Harmonic, JumpRule, HARMONICS};
pub use image::{gaussian_smooth, smooth_image, ImageField, SmoothingSchedule};
pub use linalg::{alpha_for_residual, condition_number, principal, subvector, tikhonov_solve, Solution};
pub use recon::{reconstruct, InversionConfig, Mode, Reconstruction, RunReport, XiReport};

use datasets::DatasetError;
use medium_geometry::MediumError;

#[derive(Debug, thiserror::Error)]
pub enum CoreError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Medium(#[from] MediumError),
    #[error("G + alpha I of order {order} is not positive definite at alpha = {alpha}; increase alpha")]
    NotPositiveDefinite { order: usize, alpha: f64 },
    #[error("pseudo-reconstruction needs a dataset built with the oracle block")]
    MissingOracle,
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("invalid inversion parameter: {0}")]
    Parameter(String),
    #[error("{fraction:.3} of the image lies below the amplitude floor")]
    Masked { fraction: f64 },
    #[error("residual target {target} not reachable: residual {best} at the smallest alpha")]
    ResidualTarget { target: f64, best: f64 },
}
