use crate::{steps_in, ControlError};

/// A control sampled on `n_gamma` boundary points times `n_time` time levels
/// `t_n = n dt`; values are gamma-major (time inner).
#[derive(Clone, Debug, PartialEq)]
pub struct ControlSamples {
    pub n_gamma: usize,
    pub n_time: usize,
    pub dgamma: f64,
    pub dt: f64,
    pub values: Vec<f64>,
}

impl ControlSamples {
    pub fn zeros(n_gamma: usize, n_time: usize, dgamma: f64, dt: f64) -> Self {
        ControlSamples { n_gamma, n_time, dgamma, dt, values: vec![0.0; n_gamma * n_time] }
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64>(gammas: &[f64], dgamma: f64, n_time: usize, dt: f64, f: F) -> Self {
        let mut out = Self::zeros(gammas.len(), n_time, dgamma, dt);
        for (g, &gamma) in gammas.iter().enumerate() {
            for (n, v) in out.row_mut(g).iter_mut().enumerate() {
                *v = f(gamma, n as f64 * dt);
            }
        }
        out
    }

    /// Last sampled time.
    pub fn horizon(&self) -> f64 {
        self.n_time.saturating_sub(1) as f64 * self.dt
    }

    #[inline]
    pub fn get(&self, g: usize, n: usize) -> f64 {
        self.values[g * self.n_time + n]
    }

    pub fn row(&self, g: usize) -> &[f64] {
        &self.values[g * self.n_time..(g + 1) * self.n_time]
    }

    pub fn row_mut(&mut self, g: usize) -> &mut [f64] {
        &mut self.values[g * self.n_time..(g + 1) * self.n_time]
    }

    fn map_rows<F: Fn(&[f64], &mut Vec<f64>)>(&self, n_time: usize, f: F) -> Self {
        let mut values = Vec::with_capacity(self.n_gamma * n_time);
        for g in 0..self.n_gamma {
            f(self.row(g), &mut values);
        }
        ControlSamples { n_gamma: self.n_gamma, n_time, dgamma: self.dgamma, dt: self.dt, values }
    }

    /// Odd reflection about the horizon `T` onto `[0, 2T]`. The jump at `T` is
    /// sampled at its midpoint, zero, which makes [`Self::fold_adjoint`] the exact
    /// adjoint in the trapezoid inner products.
    pub fn odd_extend(&self) -> Self {
        let nt = self.n_time - 1;
        self.map_rows(2 * nt + 1, |r, out| {
            out.extend_from_slice(&r[..nt]);
            out.push(0.0);
            out.extend((0..nt).rev().map(|n| -r[n]));
        })
    }

    /// `g(t) - g(2T - t)` on `[0, T]` for `g` sampled on `[0, 2T]`.
    pub fn fold_adjoint(&self) -> Result<Self, ControlError> {
        if self.n_time % 2 == 0 {
            return Err(ControlError::Shape(format!(
                "fold needs an odd number of time samples, got {}",
                self.n_time
            )));
        }
        let nt = (self.n_time - 1) / 2;
        Ok(self.map_rows(nt + 1, |r, out| out.extend((0..=nt).map(|n| r[n] - r[2 * nt - n]))))
    }

    /// Cumulative trapezoid integral in time, per boundary point.
    pub fn time_integrate(&self) -> Self {
        let h = 0.5 * self.dt;
        self.map_rows(self.n_time, |r, out| {
            let mut acc = 0.0;
            out.push(0.0);
            for w in r.windows(2) {
                acc += h * (w[0] + w[1]);
                out.push(acc);
            }
        })
    }

    /// Delay by `shift` samples with zero fill. Fails if values above `1e-12` of
    /// the maximum would be pushed past the last sample.
    pub fn delayed_samples(&self, shift: usize) -> Result<Self, ControlError> {
        let n = self.n_time;
        let tol = 1e-12 * self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let keep = n.saturating_sub(shift);
        for g in 0..self.n_gamma {
            if self.row(g)[keep..].iter().any(|v| v.abs() > tol) {
                return Err(ControlError::ShiftOverflow { shift });
            }
        }
        Ok(self.map_rows(n, |r, out| {
            out.extend(std::iter::repeat(0.0).take(shift.min(n)));
            out.extend_from_slice(&r[..keep]);
        }))
    }

    /// `f(t - (T - xi))` where `T` is the last sampled time.
    pub fn delayed(&self, xi: f64) -> Result<Self, ControlError> {
        let horizon = self.horizon();
        if !(xi > 0.0 && xi <= horizon * (1.0 + 1e-12)) {
            return Err(ControlError::Parameter(format!("delay target {xi} outside (0, {horizon}]")));
        }
        let shift = steps_in(horizon - xi, self.dt).ok_or(ControlError::Misaligned {
            dt: self.dt,
            what: "delay",
            value: horizon - xi,
        })?;
        self.delayed_samples(shift)
    }

    /// Trapezoid inner product over the sampled rectangle.
    pub fn inner(&self, other: &Self) -> Result<f64, ControlError> {
        if self.n_gamma != other.n_gamma || self.n_time != other.n_time {
            return Err(ControlError::Shape(format!(
                "{}x{} against {}x{}",
                self.n_gamma, self.n_time, other.n_gamma, other.n_time
            )));
        }
        let wt = trapezoid(self.n_time, self.dt);
        let wg = trapezoid(self.n_gamma, self.dgamma);
        let mut acc = 0.0;
        for (g, &w) in wg.iter().enumerate() {
            let s: f64 = self.row(g).iter().zip(other.row(g)).zip(&wt).map(|((a, b), c)| a * b * c).sum();
            acc += w * s;
        }
        Ok(acc)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).expect("same shape").sqrt()
    }

    /// `self += a x`.
    pub fn axpy(&mut self, a: f64, x: &Self) {
        assert_eq!(self.values.len(), x.values.len(), "shape mismatch in axpy");
        for (v, w) in self.values.iter_mut().zip(&x.values) {
            *v += a * w;
        }
    }
}

/// Composite trapezoid weights for `n` uniform samples.
pub(crate) fn trapezoid(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    if n == 1 {
        w[0] = 0.0;
    } else if n > 1 {
        w[0] = 0.5 * h;
        w[n - 1] = 0.5 * h;
    }
    w
}
