use std::ops::Range;

/// Dirichlet data on the boundary row. Levels past the last sample hold the last value.
pub trait BoundaryDrive: Sync {
    /// Value at boundary column `i` and time level `n`.
    fn value(&self, i: usize, n: usize) -> f64;
    /// Columns where the data can be nonzero.
    fn columns(&self) -> Range<usize>;
}

/// `profile[i - first_column] * signal[n]`.
#[derive(Clone, Debug)]
pub struct SeparableDrive {
    pub first_column: usize,
    pub profile: Vec<f64>,
    pub signal: Vec<f64>,
}

impl BoundaryDrive for SeparableDrive {
    fn value(&self, i: usize, n: usize) -> f64 {
        let r = self.columns();
        if !r.contains(&i) || self.signal.is_empty() {
            return 0.0;
        }
        self.profile[i - self.first_column] * self.signal[n.min(self.signal.len() - 1)]
    }

    fn columns(&self) -> Range<usize> {
        self.first_column..self.first_column + self.profile.len()
    }
}

/// Arbitrary samples, column outer and time inner.
#[derive(Clone, Debug)]
pub struct SampledDrive {
    pub first_column: usize,
    pub n_columns: usize,
    pub n_time: usize,
    pub values: Vec<f64>,
}

impl BoundaryDrive for SampledDrive {
    fn value(&self, i: usize, n: usize) -> f64 {
        if !self.columns().contains(&i) || self.n_time == 0 {
            return 0.0;
        }
        self.values[(i - self.first_column) * self.n_time + n.min(self.n_time - 1)]
    }

    fn columns(&self) -> Range<usize> {
        self.first_column..self.first_column + self.n_columns
    }
}
