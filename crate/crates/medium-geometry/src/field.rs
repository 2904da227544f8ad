use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

use crate::{Grid, MediumError};

/// Where a medium came from: scenario name plus its numeric parameters.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Provenance {
    pub scenario: String,
    pub params: BTreeMap<String, f64>,
}

/// Sound speed sampled on the grid of the truncated half-plane.
#[derive(Clone, Debug)]
pub struct MediumField {
    grid: Grid,
    c: Vec<f64>,
    c_star: f64,
    provenance: Provenance,
}

impl MediumField {
    pub fn new(grid: Grid, c: Vec<f64>, c_star: f64, provenance: Provenance) -> Result<Self, MediumError> {
        if c.len() != grid.len() {
            return Err(MediumError::Grid(format!(
                "speed field has {} samples, grid has {}",
                c.len(),
                grid.len()
            )));
        }
        for (k, &v) in c.iter().enumerate() {
            let (i, j) = (k % grid.n1, k / grid.n1);
            if !(v > 0.0) || !v.is_finite() {
                return Err(MediumError::NonPositive { x1: grid.x1(i), x2: grid.x2(j), value: v });
            }
            if v > c_star * (1.0 + 1e-12) {
                return Err(MediumError::AboveBound { x1: grid.x1(i), x2: grid.x2(j), value: v, c_star });
            }
        }
        Ok(MediumField { grid, c, c_star, provenance })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn speed(&self) -> &[f64] {
        &self.c
    }

    pub fn c_star(&self) -> f64 {
        self.c_star
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn c_max(&self) -> f64 {
        self.c.iter().cloned().fold(0.0, f64::max)
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.c[self.grid.idx(i, j)]
    }

    /// Bilinear sample of the speed.
    pub fn sample(&self, x1: f64, x2: f64) -> f64 {
        self.grid.interpolate(&self.c, x1, x2)
    }

    /// Density `c^-2` on the grid.
    pub fn density(&self) -> Vec<f64> {
        self.c.iter().map(|v| 1.0 / (v * v)).collect()
    }

    /// Central-difference gradient of `c` at the nodes (one-sided at the edges).
    pub fn gradient_nodes(&self) -> (Vec<f64>, Vec<f64>) {
        let g = &self.grid;
        let mut d1 = vec![0.0; g.len()];
        let mut d2 = vec![0.0; g.len()];
        for j in 0..g.n2 {
            for i in 0..g.n1 {
                let k = g.idx(i, j);
                let (il, ir) = (i.saturating_sub(1), (i + 1).min(g.n1 - 1));
                d1[k] = (self.at(ir, j) - self.at(il, j)) / ((ir - il) as f64 * g.h1);
                // x2 decreases with j
                let (ju, jd) = (j.saturating_sub(1), (j + 1).min(g.n2 - 1));
                d2[k] = (self.at(i, ju) - self.at(i, jd)) / ((jd - ju) as f64 * g.h2);
            }
        }
        (d1, d2)
    }

    /// SHA-256 over the grid description and the raw speed samples.
    pub fn content_hash(&self) -> String {
        let g = &self.grid;
        let mut h = Sha256::new();
        h.update((g.n1 as u64).to_le_bytes());
        h.update((g.n2 as u64).to_le_bytes());
        for v in [g.x1_min, g.h1, g.h2, self.c_star] {
            h.update(v.to_le_bytes());
        }
        for v in &self.c {
            h.update(v.to_le_bytes());
        }
        to_hex(&h.finalize())
    }
}

pub(crate) fn to_hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Speed and its gradient, sampled with bilinear interpolation of node values.
pub struct SpeedSampler<'a> {
    medium: &'a MediumField,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl<'a> SpeedSampler<'a> {
    pub fn new(medium: &'a MediumField) -> Self {
        let (d1, d2) = medium.gradient_nodes();
        SpeedSampler { medium, d1, d2 }
    }

    pub fn eval(&self, x1: f64, x2: f64) -> (f64, f64, f64) {
        let g = self.medium.grid();
        (
            self.medium.sample(x1, x2),
            g.interpolate(&self.d1, x1, x2),
            g.interpolate(&self.d2, x1, x2),
        )
    }
}
