//! Sound-speed media on the half-plane `x2 <= 0`: test scenarios, the ray
//! (semigeodesic) chart used as ground truth, and tube masks.

mod field;
mod grid;
pub mod raster;
pub mod rays;
pub mod scenario;

pub use field::{MediumField, Provenance, SpeedSampler};
pub use grid::Grid;
pub use raster::{mask_area, rasterize_sheet, tube_mask};
pub use rays::{trace_rays, RayChart};
pub use scenario::{fdi_extent, make_scenario, Resolution, ScenarioKind, ScenarioSpec, WedgeSpec};

#[derive(Debug, thiserror::Error)]
pub enum MediumError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("invalid scenario parameter: {0}")]
    Parameter(String),
    #[error("non-positive or non-finite value {value} at ({x1}, {x2})")]
    NonPositive { x1: f64, x2: f64, value: f64 },
    #[error("speed {value} at ({x1}, {x2}) exceeds the bound c_star = {c_star}")]
    AboveBound { x1: f64, x2: f64, value: f64, c_star: f64 },
    #[error("ray from gamma = {gamma} left the grid at xi = {xi}")]
    RayLeftGrid { gamma: f64, xi: f64 },
    #[error("caustic near gamma = {gamma}, xi = {xi}")]
    Caustic { gamma: f64, xi: f64 },
}
