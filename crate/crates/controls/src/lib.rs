//! Boundary-control bases `f_k(gamma, t) = phi_l(gamma) psi_m(t)` and the
//! control-space transforms used to build the connecting operator.

mod basis;
mod samples;

pub use basis::{
    eta, lncosh, spatial_trig, theta, theta_integral, BasisSpec, ControlBasis, SpatialFamily, TentShape,
};
pub use samples::ControlSamples;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ControlError {
    #[error("invalid basis parameter: {0}")]
    Parameter(String),
    #[error("time grid step {dt} does not divide {what} = {value}")]
    Misaligned { dt: f64, what: &'static str, value: f64 },
    #[error("shift by {shift} samples pushes nonzero values past the horizon")]
    ShiftOverflow { shift: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Whole number of steps `dt` in `value`, if it is one within a relative `1e-9`.
pub fn steps_in(value: f64, dt: f64) -> Option<usize> {
    let r = value / dt;
    let n = r.round();
    if n >= 0.0 && (r - n).abs() <= 1e-9 * n.max(1.0) {
        Some(n as usize)
    } else {
        None
    }
}
