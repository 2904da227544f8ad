use serde::{Deserialize, Serialize};

use crate::MediumError;

/// Node-centred Cartesian grid of the truncated half-plane.
///
/// Row `j` sits at depth `x2 = -j * h2` (row 0 is the boundary), column `i`
/// at `x1 = x1_min + i * h1`. Fields are stored row-major, row outer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n1: usize,
    pub n2: usize,
    pub x1_min: f64,
    pub h1: f64,
    pub h2: f64,
}

impl Grid {
    pub fn new(n1: usize, n2: usize, x1_min: f64, h1: f64, h2: f64) -> Result<Self, MediumError> {
        if !(h1 > 0.0 && h2 > 0.0) || !h1.is_finite() || !h2.is_finite() {
            return Err(MediumError::Grid(format!("spacings must be positive, got h1={h1}, h2={h2}")));
        }
        if n1 < 3 || n2 < 3 {
            return Err(MediumError::Grid(format!("grid too small: {n1}x{n2}")));
        }
        Ok(Grid { n1, n2, x1_min, h1, h2 })
    }

    /// Grid symmetric about `x1 = 0` covering `[-half_width, half_width] x [-depth, 0]`.
    pub fn symmetric(half_width: f64, depth: f64, h: f64) -> Result<Self, MediumError> {
        if !(h > 0.0) {
            return Err(MediumError::Grid(format!("spacing must be positive, got {h}")));
        }
        let nx = (half_width / h - 1e-9).ceil().max(1.0) as usize;
        let ny = (depth / h - 1e-9).ceil().max(2.0) as usize;
        Grid::new(2 * nx + 1, ny + 1, -(nx as f64) * h, h, h)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.n1 + i
    }

    #[inline]
    pub fn x1(&self, i: usize) -> f64 {
        self.x1_min + i as f64 * self.h1
    }

    #[inline]
    pub fn x2(&self, j: usize) -> f64 {
        -(j as f64) * self.h2
    }

    pub fn x1_max(&self) -> f64 {
        self.x1(self.n1 - 1)
    }

    pub fn depth(&self) -> f64 {
        (self.n2 - 1) as f64 * self.h2
    }

    /// Column index of the node nearest to `x1`, if inside the grid.
    pub fn column_of(&self, x1: f64) -> Option<usize> {
        let r = ((x1 - self.x1_min) / self.h1).round();
        if r < 0.0 || r > (self.n1 - 1) as f64 {
            None
        } else {
            Some(r as usize)
        }
    }

    /// Columns whose nodes satisfy `|x1| <= half + tol`.
    pub fn columns_within(&self, half: f64) -> std::ops::Range<usize> {
        let tol = 1e-9 * self.h1;
        let lo = (0..self.n1).find(|&i| self.x1(i) >= -half - tol).unwrap_or(self.n1);
        let hi = (0..self.n1).rev().find(|&i| self.x1(i) <= half + tol).map_or(lo, |i| i + 1);
        lo..hi.max(lo)
    }

    pub fn covers(&self, x1_lo: f64, x1_hi: f64, depth: f64) -> bool {
        let tol = 1e-9 * self.h1.max(self.h2);
        self.x1_min <= x1_lo + tol && self.x1_max() >= x1_hi - tol && self.depth() >= depth - tol
    }

    /// Fractional cell coordinates of a point, clamped to the grid.
    pub(crate) fn locate(&self, x1: f64, x2: f64) -> (usize, usize, f64, f64) {
        let fi = ((x1 - self.x1_min) / self.h1).clamp(0.0, (self.n1 - 1) as f64);
        let fj = (-x2 / self.h2).clamp(0.0, (self.n2 - 1) as f64);
        let i = (fi.floor() as usize).min(self.n1 - 2);
        let j = (fj.floor() as usize).min(self.n2 - 2);
        (i, j, fi - i as f64, fj - j as f64)
    }

    pub fn contains(&self, x1: f64, x2: f64) -> bool {
        let tol = 1e-12;
        x1 >= self.x1_min - tol && x1 <= self.x1_max() + tol && x2 <= tol && -x2 <= self.depth() + tol
    }

    /// Bilinear interpolation of a node field.
    pub fn interpolate(&self, field: &[f64], x1: f64, x2: f64) -> f64 {
        let (i, j, a, b) = self.locate(x1, x2);
        let f00 = field[self.idx(i, j)];
        let f10 = field[self.idx(i + 1, j)];
        let f01 = field[self.idx(i, j + 1)];
        let f11 = field[self.idx(i + 1, j + 1)];
        (1.0 - b) * ((1.0 - a) * f00 + a * f10) + b * ((1.0 - a) * f01 + a * f11)
    }

    /// Trapezoid quadrature weights for node `(i, j)`.
    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let wi = if i == 0 || i == self.n1 - 1 { 0.5 } else { 1.0 };
        let wj = if j == 0 || j == self.n2 - 1 { 0.5 } else { 1.0 };
        wi * wj * self.h1 * self.h2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_grid_is_centred() {
        let g = Grid::symmetric(1.0, 0.5, 0.25).unwrap();
        assert_eq!(g.n1, 9);
        assert_eq!(g.n2, 3);
        assert!((g.x1(4)).abs() < 1e-15);
        assert!((g.x1_max() - 1.0).abs() < 1e-15);
        assert!((g.depth() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bilinear_reproduces_linear_fields() {
        let g = Grid::symmetric(1.0, 1.0, 0.1).unwrap();
        let f: Vec<f64> = (0..g.len())
            .map(|k| {
                let (i, j) = (k % g.n1, k / g.n1);
                2.0 * g.x1(i) - 3.0 * g.x2(j) + 1.0
            })
            .collect();
        let v = g.interpolate(&f, 0.234, -0.567);
        assert!((v - (2.0 * 0.234 + 3.0 * 0.567 + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn columns_within_half_width() {
        let g = Grid::symmetric(2.0, 1.0, 0.5).unwrap();
        let r = g.columns_within(1.0);
        assert_eq!(r.len(), 5);
        assert!((g.x1(r.start) + 1.0).abs() < 1e-12);
    }
}
