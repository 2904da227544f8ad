use serde::{Deserialize, Serialize};

use crate::Harmonic;

/// Image of a harmonic on the `(gamma, xi)` lattice, gamma-major.
#[derive(Clone, Debug)]
pub struct ImageField {
    pub harmonic: Harmonic,
    pub gammas: Vec<f64>,
    pub xis: Vec<f64>,
    pub values: Vec<f64>,
}

impl ImageField {
    pub fn at(&self, g: usize, l: usize) -> f64 {
        self.values[g * self.xis.len() + l]
    }
}

/// Gaussian smoothing widths in physical units; a zero width disables an axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoothingSchedule {
    pub sigma_gamma: f64,
    /// Width reached at `xi = T`; the gamma width ramps linearly to it.
    pub sigma_gamma_end: Option<f64>,
    /// Fraction of `[0, T]` at its end over which the ramp runs.
    pub ramp_fraction: f64,
    pub sigma_xi: f64,
}

impl Default for SmoothingSchedule {
    fn default() -> Self {
        SmoothingSchedule { sigma_gamma: 0.1875, sigma_gamma_end: None, ramp_fraction: 0.2, sigma_xi: 0.0 }
    }
}

impl SmoothingSchedule {
    pub fn sigma_gamma_at(&self, xi: f64, horizon: f64) -> f64 {
        let Some(end) = self.sigma_gamma_end else { return self.sigma_gamma };
        let start = (1.0 - self.ramp_fraction) * horizon;
        if xi <= start || self.ramp_fraction <= 0.0 {
            return self.sigma_gamma;
        }
        let s = ((xi - start) / (horizon - start)).min(1.0);
        self.sigma_gamma + s * (end - self.sigma_gamma)
    }
}

fn reflect(i: isize, n: isize) -> usize {
    let period = 2 * n;
    let mut k = i.rem_euclid(period);
    if k >= n {
        k = period - 1 - k;
    }
    k as usize
}

/// Gaussian filter of width `sigma` (in samples), truncated at four widths,
/// with half-sample symmetric reflection at the ends.
pub fn gaussian_smooth(data: &[f64], sigma: f64) -> Vec<f64> {
    let n = data.len();
    if sigma <= 0.0 || n < 2 {
        return data.to_vec();
    }
    let r = (4.0 * sigma + 0.5) as isize;
    let mut w: Vec<f64> = (-r..=r).map(|k| (-0.5 * (k as f64 / sigma).powi(2)).exp()).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    (0..n as isize)
        .map(|i| (-r..=r).zip(&w).map(|(k, wk)| wk * data[reflect(i + k, n as isize)]).sum())
        .collect()
}

/// Smooths along gamma (per-xi width from the schedule), then along xi.
pub fn smooth_image(img: &ImageField, schedule: &SmoothingSchedule, horizon: f64) -> ImageField {
    let (ng, nx) = (img.gammas.len(), img.xis.len());
    let dg = if ng > 1 { img.gammas[1] - img.gammas[0] } else { 1.0 };
    let dx = if nx > 1 { img.xis[1] - img.xis[0] } else { 1.0 };
    let mut out = img.values.clone();
    for (l, &xi) in img.xis.iter().enumerate() {
        let col: Vec<f64> = (0..ng).map(|g| out[g * nx + l]).collect();
        let sm = gaussian_smooth(&col, schedule.sigma_gamma_at(xi, horizon) / dg);
        for (g, v) in sm.into_iter().enumerate() {
            out[g * nx + l] = v;
        }
    }
    if schedule.sigma_xi > 0.0 {
        for row in out.chunks_exact_mut(nx.max(1)) {
            let sm = gaussian_smooth(row, schedule.sigma_xi / dx);
            row.copy_from_slice(&sm);
        }
    }
    ImageField { harmonic: img.harmonic, gammas: img.gammas.clone(), xis: img.xis.clone(), values: out }
}
