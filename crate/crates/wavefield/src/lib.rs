//! Explicit second-order solver for `u_tt = c^2 Lap u` on the truncated half-plane,
//! driven by Dirichlet data on the boundary row, with normal-derivative traces.

mod drive;
mod solver;

pub use drive::{BoundaryDrive, SampledDrive, SeparableDrive};
pub use solver::{inner_product_h, RunOutput, RunSpec, Solver, SolverConfig, TraceStencil};

use std::fmt::Debug;

/// Scalar type the time stepper runs in.
pub trait Real: num_traits::Float + num_traits::FromPrimitive + Send + Sync + Debug + 'static {}

impl Real for f32 {}
impl Real for f64 {}

pub type Solver64 = Solver<f64>;
pub type Solver32 = Solver<f32>;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum WaveError {
    #[error("time step {dt} exceeds the stability limit {limit}")]
    Cfl { dt: f64, limit: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid solver parameter: {0}")]
    Parameter(String),
}
