use std::ops::Range;

use controls::{BasisSpec, ControlBasis};
use medium_geometry::Grid;
use serde::{Deserialize, Serialize};
use wavefield::SolverConfig;

use crate::DatasetError;

pub const FORMAT_VERSION: u32 = 1;

/// Everything needed to interpret the traces without the medium.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    pub scenario: String,
    pub medium_hash: String,
    pub c_star: f64,
    pub horizon: f64,
    pub half_width: f64,
    /// Time step; divides the temporal spacing of the basis.
    pub dt: f64,
    /// Steps in one horizon `T`.
    pub horizon_steps: usize,
    /// Delay grid `xi_l = l xi_step`, `l < xi_count`.
    pub xi_step: f64,
    pub xi_count: usize,
    /// Boundary columns of the measurement strip `|x1| <= support + c_star T`.
    pub strip_columns: [usize; 2],
    /// Boundary columns carrying the controls.
    pub support_columns: [usize; 2],
    /// Temporal indices whose tents do not fit before `T` once reflected; their
    /// generator traces were solved directly.
    pub truncated: Vec<usize>,
    pub oracle: bool,
    pub basis: BasisSpec,
    pub solver: SolverConfig,
    pub grid: Grid,
}

impl Manifest {
    pub fn basis(&self) -> Result<ControlBasis, DatasetError> {
        Ok(ControlBasis::new(&self.basis, self.horizon, self.half_width, self.dt)?)
    }

    pub fn n_controls(&self) -> usize {
        self.basis.n_gamma * self.basis.n_t
    }

    pub fn strip(&self) -> Range<usize> {
        self.strip_columns[0]..self.strip_columns[1]
    }

    pub fn support(&self) -> Range<usize> {
        self.support_columns[0]..self.support_columns[1]
    }

    pub fn strip_gammas(&self) -> Vec<f64> {
        self.strip().map(|i| self.grid.x1(i)).collect()
    }

    pub fn support_gammas(&self) -> Vec<f64> {
        self.support().map(|i| self.grid.x1(i)).collect()
    }

    pub fn xis(&self) -> Vec<f64> {
        (0..self.xi_count).map(|l| l as f64 * self.xi_step).collect()
    }

    /// Samples per temporal spacing.
    pub fn step_samples(&self) -> usize {
        self.horizon_steps / self.basis.n_t
    }

    /// Refuses a dataset recorded for a different horizon or patch.
    pub fn check_compatible(&self, horizon: f64, half_width: f64) -> Result<(), DatasetError> {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
        if !close(self.horizon, horizon) {
            return Err(DatasetError::Mismatch(format!("dataset horizon {} but configured {horizon}", self.horizon)));
        }
        if !close(self.half_width, half_width) {
            return Err(DatasetError::Mismatch(format!(
                "dataset half-width {} but configured {half_width}",
                self.half_width
            )));
        }
        Ok(())
    }
}

/// Interior products of the final-time waves of the basis controls.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleBlock {
    /// `(u^{f_i}(T), u^{f_j}(T))_H`, row-major `N x N`.
    pub gram: Vec<f64>,
    /// `(a, u^{f_k}(T))_H` for `a = 1, x1, x2`.
    pub rhs: [Vec<f64>; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceDataset {
    pub manifest: Manifest,
    /// Per spatial index: trace of the first temporal tent on the strip over `[0, T]`.
    pub response: Vec<Vec<f64>>,
    /// Per spatial index: trace of the integrated first tent on the support over `[0, 2T]`.
    pub generator: Vec<Vec<f64>>,
    /// Per truncated temporal index (outer) and spatial index: trace of the
    /// integrated odd extension on the support over `[0, 2T]`.
    pub direct: Vec<Vec<f64>>,
    pub oracle: Option<OracleBlock>,
}

/// Delays every column (time inner) by `shift` samples with zero fill.
pub fn shift_columns(data: &[f64], n_time: usize, shift: usize) -> Vec<f64> {
    let mut out = vec![0.0; data.len()];
    if shift >= n_time {
        return out;
    }
    for (src, dst) in data.chunks_exact(n_time).zip(out.chunks_exact_mut(n_time)) {
        dst[shift..].copy_from_slice(&src[..n_time - shift]);
    }
    out
}

impl TraceDataset {
    pub fn len(&self) -> usize {
        self.manifest.n_controls()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Time samples on `[0, T]`.
    pub fn n_time(&self) -> usize {
        self.manifest.horizon_steps + 1
    }

    /// Time samples on `[0, 2T]`.
    pub fn n_time_double(&self) -> usize {
        2 * self.manifest.horizon_steps + 1
    }

    fn split(&self, k: usize) -> (usize, usize) {
        let ng = self.manifest.basis.n_gamma;
        (k % ng, k / ng)
    }

    /// Trace of control `k` on the strip over `[0, T]`.
    pub fn response_trace(&self, k: usize) -> Vec<f64> {
        let (l, m) = self.split(k);
        shift_columns(&self.response[l], self.n_time(), m * self.manifest.step_samples())
    }

    /// Trace of the integrated odd extension of control `k` on the support over `[0, 2T]`.
    pub fn integrated_trace(&self, k: usize) -> Vec<f64> {
        let (l, m) = self.split(k);
        let mf = &self.manifest;
        if let Some(q) = mf.truncated.iter().position(|&t| t == m) {
            return self.direct[q * mf.basis.n_gamma + l].clone();
        }
        let n2 = self.n_time_double();
        let step = mf.step_samples();
        let lead = m * step;
        let delta = steps(mf.basis.delta.unwrap_or(0.0), mf.dt);
        let back = 2 * mf.horizon_steps - 2 * step - m * step - 2 * delta;
        let g = &self.generator[l];
        let mut out = shift_columns(g, n2, lead);
        for (o, s) in out.iter_mut().zip(shift_columns(g, n2, back)) {
            *o -= s;
        }
        out
    }

    /// Samples of temporal function `m` on `[0, T]`: the first tent delayed with zero fill.
    pub fn temporal(&self, basis: &ControlBasis, m: usize) -> Vec<f64> {
        let n = self.n_time();
        let first: Vec<f64> = (0..n).map(|i| basis.temporal(0, i as f64 * self.manifest.dt)).collect();
        shift_columns(&first, n, m * self.manifest.step_samples())
    }
}

pub(crate) fn steps(t: f64, dt: f64) -> usize {
    (t / dt).round() as usize
}
