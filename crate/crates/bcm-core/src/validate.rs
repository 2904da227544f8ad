//! Comparison of a reconstruction with the true medium.

use medium_geometry::rays::trace_rays_with;
use medium_geometry::{rasterize_sheet, Grid, MediumField};
use serde::{Deserialize, Serialize};

use crate::{CoreError, Reconstruction};

/// Interior part of the chart where errors are scored, as fractions of the
/// patch half-width and of the horizon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InteriorRegion {
    pub gamma_fraction: f64,
    pub xi_min: f64,
    pub xi_max: f64,
}

impl Default for InteriorRegion {
    fn default() -> Self {
        InteriorRegion { gamma_fraction: 0.5, xi_min: 0.1, xi_max: 0.8 }
    }
}

impl InteriorRegion {
    fn contains(&self, gamma: f64, xi: f64, half_width: f64, horizon: f64) -> bool {
        gamma.abs() <= self.gamma_fraction * half_width + 1e-12
            && xi >= self.xi_min * horizon - 1e-12
            && xi <= self.xi_max * horizon + 1e-12
    }
}

/// Grid nodes inside the true image of the interior region of the chart.
pub fn interior_mask(
    medium: &MediumField,
    region: &InteriorRegion,
    half_width: f64,
    horizon: f64,
) -> Result<Vec<bool>, CoreError> {
    let grid = medium.grid();
    let gw = region.gamma_fraction * half_width;
    let ng = ((2.0 * gw / grid.h1).round() as usize).max(1) + 1;
    let gammas: Vec<f64> = (0..ng).map(|i| -gw + 2.0 * gw * i as f64 / (ng - 1) as f64).collect();
    let top = region.xi_max * horizon;
    let chart = trace_rays_with(medium, &gammas, grid.h1.min(top / 8.0), top, 8)?;
    if let Some((gamma, xi)) = chart.caustic {
        return Err(CoreError::Medium(medium_geometry::MediumError::Caustic { gamma, xi }));
    }
    let lo = chart.xis.iter().position(|&x| x >= region.xi_min * horizon - 1e-12).unwrap_or(0);
    let nv = chart.xis.len() - lo;
    let mut x1 = Vec::with_capacity(ng * nv);
    let mut x2 = Vec::with_capacity(ng * nv);
    for g in 0..ng {
        for k in lo..chart.xis.len() {
            let (a, b) = chart.position(g, k);
            x1.push(a);
            x2.push(b);
        }
    }
    Ok(rasterize_sheet(grid, nv, &x1, &x2, &[], None).0)
}

/// Recovered speed transferred to grid nodes (`NaN` where not covered).
pub fn resample_speed(recon: &Reconstruction, grid: &Grid) -> (Vec<bool>, Vec<f64>) {
    let valid: Vec<bool> = recon.valid.iter().zip(&recon.speed).map(|(v, c)| *v && c.is_finite()).collect();
    let (mask, mut fields) =
        rasterize_sheet(grid, recon.xis.len(), &recon.x1, &recon.x2, &[&recon.speed], Some(&valid));
    (mask, fields.remove(0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    /// Nodes scored.
    pub nodes: usize,
    /// Scored nodes the reconstruction covers.
    pub covered: usize,
    /// Relative errors over covered nodes; uncovered nodes count as failures in `within`.
    pub median: f64,
    pub p90: f64,
    pub max: f64,
    pub threshold: f64,
    /// Fraction of scored nodes with relative error at most `threshold`.
    pub within: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let (i, f) = (pos.floor() as usize, pos.fract());
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - f) + sorted[i + 1] * f
    } else {
        sorted[i]
    }
}

/// Relative speed errors on masked nodes: the error map (`NaN` off the mask
/// or where uncovered) and its statistics.
pub fn relative_errors(speed: &[f64], truth: &MediumField, mask: &[bool], threshold: f64) -> (Vec<f64>, ErrorStats) {
    let c = truth.speed();
    let mut map = vec![f64::NAN; c.len()];
    let mut errs = Vec::new();
    let mut nodes = 0;
    for i in 0..c.len() {
        if !mask[i] {
            continue;
        }
        nodes += 1;
        if speed[i].is_finite() {
            let e = (speed[i] - c[i]).abs() / c[i];
            map[i] = e;
            errs.push(e);
        }
    }
    errs.sort_by(|a, b| a.total_cmp(b));
    let within = errs.iter().filter(|e| **e <= threshold).count() as f64 / nodes.max(1) as f64;
    let stats = ErrorStats {
        nodes,
        covered: errs.len(),
        median: quantile(&errs, 0.5),
        p90: quantile(&errs, 0.9),
        max: errs.last().copied().unwrap_or(f64::NAN),
        threshold,
        within,
    };
    (map, stats)
}

/// Errors of the recovered map and speed against the true ray chart, on chart samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartErrors {
    pub samples: usize,
    pub masked: usize,
    pub speed_max: f64,
    pub speed_median: f64,
    pub position_max: f64,
    pub position_median: f64,
}

pub fn chart_errors(
    recon: &Reconstruction,
    medium: &MediumField,
    region: &InteriorRegion,
    half_width: f64,
) -> Result<ChartErrors, CoreError> {
    let nx = recon.xis.len();
    let dxi = if nx > 1 { recon.xis[1] - recon.xis[0] } else { recon.horizon };
    let top = recon.xis[nx - 1].max(dxi);
    let chart = trace_rays_with(medium, &recon.gammas, dxi, top, 16)?;
    let (mut es, mut ep, mut masked) = (Vec::new(), Vec::new(), 0);
    for (g, &gamma) in recon.gammas.iter().enumerate() {
        for (l, &xi) in recon.xis.iter().enumerate() {
            if !region.contains(gamma, xi, half_width, recon.horizon) {
                continue;
            }
            let i = g * nx + l;
            if !recon.valid[i] || !recon.speed[i].is_finite() {
                masked += 1;
                continue;
            }
            let (a, b) = chart.position(g, l);
            let c = medium.sample(a, b);
            es.push((recon.speed[i] - c).abs() / c);
            ep.push(((recon.x1[i] - a).powi(2) + (recon.x2[i] - b).powi(2)).sqrt());
        }
    }
    es.sort_by(|a, b| a.total_cmp(b));
    ep.sort_by(|a, b| a.total_cmp(b));
    Ok(ChartErrors {
        samples: es.len() + masked,
        masked,
        speed_max: es.last().copied().unwrap_or(f64::NAN),
        speed_median: quantile(&es, 0.5),
        position_max: ep.last().copied().unwrap_or(f64::NAN),
        position_median: quantile(&ep, 0.5),
    })
}
