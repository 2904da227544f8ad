use std::ops::Range;

use medium_geometry::{Grid, MediumField};
use serde::{Deserialize, Serialize};

use crate::{BoundaryDrive, Real, WaveError};

/// How the normal derivative on the boundary row is approximated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceStencil {
    /// First difference corrected by half a cell of `u_yy = u_tt / c^2 - u_xx`,
    /// evaluated from the boundary data. Second order.
    Flux,
    /// One-sided three-point difference into the interior. Second order.
    OneSided,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Target Courant number `c_max dt sqrt(h1^-2 + h2^-2)`; stability needs `<= 1`.
    pub courant: f64,
    pub trace: TraceStencil,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { courant: 0.7, trace: TraceStencil::Flux }
    }
}

/// One forward run.
#[derive(Clone, Default)]
pub struct RunSpec<'a> {
    pub drive: Option<&'a dyn BoundaryDrive>,
    /// Cauchy data `(u, u_t)` at `t = 0` on the whole grid.
    pub initial: Option<(&'a [f64], &'a [f64])>,
    pub n_steps: usize,
    pub trace_columns: Range<usize>,
    pub track_energy: bool,
}

#[derive(Clone, Debug)]
pub struct RunOutput<R> {
    pub trace_columns: Range<usize>,
    /// Time levels recorded, `n_steps + 1`.
    pub n_time: usize,
    /// Normal derivative, column outer and time inner.
    pub trace: Vec<f64>,
    pub final_u: Vec<R>,
    /// Staggered discrete energy between levels `n` and `n + 1`.
    pub energy: Vec<f64>,
}

impl<R> RunOutput<R> {
    pub fn trace_at(&self, column: usize, n: usize) -> f64 {
        self.trace[(column - self.trace_columns.start) * self.n_time + n]
    }

    pub fn column(&self, column: usize) -> &[f64] {
        let k = column - self.trace_columns.start;
        &self.trace[k * self.n_time..(k + 1) * self.n_time]
    }
}

/// Leapfrog in time, five-point Laplacian in space, Dirichlet data on every side.
#[derive(Clone, Debug)]
pub struct Solver<R> {
    grid: Grid,
    dt: f64,
    courant: f64,
    stencil: TraceStencil,
    a: Vec<R>,
    inv_c2: Vec<f64>,
    ih1: R,
    ih2: R,
}

fn stability_factor(grid: &Grid) -> f64 {
    (grid.h1.powi(-2) + grid.h2.powi(-2)).sqrt()
}

impl<R: Real> Solver<R> {
    /// Chooses the largest step below the configured Courant number that divides `align`.
    pub fn new(medium: &MediumField, config: &SolverConfig, align: f64) -> Result<Self, WaveError> {
        if !(config.courant > 0.0 && config.courant <= 1.0) {
            return Err(WaveError::Parameter(format!("Courant number must lie in (0, 1], got {}", config.courant)));
        }
        if !(align > 0.0) || !align.is_finite() {
            return Err(WaveError::Parameter(format!("alignment interval must be positive, got {align}")));
        }
        let dt_max = config.courant / (medium.c_max() * stability_factor(medium.grid()));
        let dt = align / (align / dt_max - 1e-9).ceil().max(1.0);
        Self::with_dt(medium, config, dt)
    }

    pub fn with_dt(medium: &MediumField, config: &SolverConfig, dt: f64) -> Result<Self, WaveError> {
        let grid = medium.grid().clone();
        let limit = 1.0 / (medium.c_max() * stability_factor(&grid));
        if !(dt > 0.0) || dt > limit {
            return Err(WaveError::Cfl { dt, limit });
        }
        let a = medium
            .speed()
            .iter()
            .map(|c| R::from_f64(dt * dt * c * c).expect("finite coefficient"))
            .collect();
        let inv_c2 = medium.density();
        let ih1 = R::from_f64(grid.h1.powi(-2)).unwrap();
        let ih2 = R::from_f64(grid.h2.powi(-2)).unwrap();
        Ok(Solver { courant: dt / limit, grid, dt, stencil: config.trace, a, inv_c2, ih1, ih2 })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn courant(&self) -> f64 {
        self.courant
    }

    /// Number of steps covering `t`, which must be a multiple of `dt`.
    pub fn steps_for(&self, t: f64) -> Result<usize, WaveError> {
        let r = t / self.dt;
        let n = r.round();
        if n < 0.0 || (r - n).abs() > 1e-9 * n.max(1.0) {
            return Err(WaveError::Parameter(format!("time {t} is not a multiple of dt = {}", self.dt)));
        }
        Ok(n as usize)
    }

    #[inline]
    fn lap(&self, u: &[R], k: usize) -> R {
        let n1 = self.grid.n1;
        let c = u[k] + u[k];
        (u[k - 1] - c + u[k + 1]) * self.ih1 + (u[k - n1] - c + u[k + n1]) * self.ih2
    }

    /// Staggered energy `sum c^-2 ((v - u) / dt)^2 - <Lap v, u>` over interior nodes.
    /// Constant in time while the boundary data vanish.
    pub fn energy(&self, u: &[R], v: &[R]) -> f64 {
        let g = &self.grid;
        let mut kin = 0.0;
        let mut pot = 0.0;
        for j in 1..g.n2 - 1 {
            for i in 1..g.n1 - 1 {
                let k = g.idx(i, j);
                let d = (v[k] - u[k]).to_f64().unwrap() / self.dt;
                kin += self.inv_c2[k] * d * d;
                pot -= self.lap(v, k).to_f64().unwrap() * u[k].to_f64().unwrap();
            }
        }
        (kin + pot) * g.h1 * g.h2
    }

    pub fn run(&self, spec: &RunSpec, observer: &mut dyn FnMut(usize, &[R])) -> Result<RunOutput<R>, WaveError> {
        let g = &self.grid;
        let (n1, n2) = (g.n1, g.n2);
        let tc = spec.trace_columns.clone();
        if tc.end > n1 || tc.start > tc.end {
            return Err(WaveError::Shape(format!("trace columns {tc:?} outside 0..{n1}")));
        }
        if n2 < 3 {
            return Err(WaveError::Shape("need at least three rows for a trace".into()));
        }
        let zero = R::zero();
        let half = R::from_f64(0.5).unwrap();
        let two = R::from_f64(2.0).unwrap();
        let to_r = |v: f64| R::from_f64(v).unwrap();

        let mut prev = vec![zero; g.len()];
        let mut cur = vec![zero; g.len()];
        if let Some((u0, v0)) = spec.initial {
            if u0.len() != g.len() || v0.len() != g.len() {
                return Err(WaveError::Shape(format!("Cauchy data must have {} samples", g.len())));
            }
            for k in 0..g.len() {
                cur[k] = to_r(u0[k]);
            }
        }
        let drive_value = |i: usize, n: usize| spec.drive.map_or(0.0, |d| d.value(i, n));
        let drive_cols = spec.drive.map_or(0..0, |d| d.columns());
        let set_boundary = |u: &mut [R], n: usize| {
            for i in drive_cols.clone() {
                if i < n1 {
                    u[i] = to_r(drive_value(i, n));
                }
            }
        };
        set_boundary(&mut cur, 0);

        // fictitious level -1 so that the first step is a Taylor step
        if let Some((_, v0)) = spec.initial {
            let dt = to_r(self.dt);
            for j in 1..n2 - 1 {
                for i in 1..n1 - 1 {
                    let k = g.idx(i, j);
                    prev[k] = cur[k] - dt * to_r(v0[k]) + half * self.a[k] * self.lap(&cur, k);
                }
            }
        } else {
            for j in 1..n2 - 1 {
                for i in 1..n1 - 1 {
                    let k = g.idx(i, j);
                    prev[k] = cur[k] + half * self.a[k] * self.lap(&cur, k);
                }
            }
        }

        let n_time = spec.n_steps + 1;
        let mut trace = vec![0.0; tc.len() * n_time];
        let mut energy = Vec::with_capacity(if spec.track_energy { spec.n_steps } else { 0 });
        let c2_boundary: Vec<f64> = (0..n1).map(|i| 1.0 / self.inv_c2[i]).collect();
        let full = spec.initial.is_some() || drive_cols.is_empty();

        for n in 0..=spec.n_steps {
            observer(n, &cur);
            self.record_trace(&cur, n, &tc, n_time, &c2_boundary, &drive_value, &mut trace);
            if n == spec.n_steps {
                break;
            }
            let (rows, cols) = if full {
                (1..n2 - 1, 1..n1 - 1)
            } else {
                let lo = drive_cols.start.saturating_sub(n + 2).max(1);
                let hi = (drive_cols.end + n + 2).min(n1 - 1);
                (1..(n + 3).min(n2 - 1), lo..hi)
            };
            for j in rows {
                for i in cols.clone() {
                    let k = j * n1 + i;
                    prev[k] = two * cur[k] - prev[k] + self.a[k] * self.lap(&cur, k);
                }
            }
            set_boundary(&mut prev, n + 1);
            std::mem::swap(&mut prev, &mut cur);
            if spec.track_energy {
                energy.push(self.energy(&prev, &cur));
            }
        }
        Ok(RunOutput { trace_columns: tc, n_time, trace, final_u: cur, energy })
    }

    #[allow(clippy::too_many_arguments)]
    fn record_trace(
        &self,
        u: &[R],
        n: usize,
        tc: &Range<usize>,
        n_time: usize,
        c2: &[f64],
        f: &dyn Fn(usize, usize) -> f64,
        out: &mut [f64],
    ) {
        let g = &self.grid;
        let n1 = g.n1;
        let h = g.h2;
        for (q, i) in tc.clone().enumerate() {
            let u0 = u[i].to_f64().unwrap();
            let u1 = u[n1 + i].to_f64().unwrap();
            let v = match self.stencil {
                TraceStencil::OneSided => {
                    let u2 = u[2 * n1 + i].to_f64().unwrap();
                    (3.0 * u0 - 4.0 * u1 + u2) / (2.0 * h)
                }
                TraceStencil::Flux => {
                    let ftt = if n == 0 {
                        0.0
                    } else {
                        (f(i, n + 1) - 2.0 * f(i, n) + f(i, n - 1)) / (self.dt * self.dt)
                    };
                    let fxx = if i == 0 || i + 1 == n1 {
                        0.0
                    } else {
                        (f(i - 1, n) - 2.0 * f(i, n) + f(i + 1, n)) / (g.h1 * g.h1)
                    };
                    (u0 - u1) / h + 0.5 * h * (ftt / c2[i] - fxx)
                }
            };
            out[q * n_time + n] = v;
        }
    }
}

/// `sum w y v / c^2` with trapezoid weights, optionally restricted to a node mask.
pub fn inner_product_h<R: Real>(medium: &MediumField, y: &[R], v: &[R], mask: Option<&[bool]>) -> Result<f64, WaveError> {
    let g = medium.grid();
    if y.len() != g.len() || v.len() != g.len() || mask.is_some_and(|m| m.len() != g.len()) {
        return Err(WaveError::Shape(format!("fields must have {} samples", g.len())));
    }
    let c = medium.speed();
    let mut acc = 0.0;
    for j in 0..g.n2 {
        for i in 0..g.n1 {
            let k = g.idx(i, j);
            if mask.is_none_or(|m| m[k]) {
                acc += g.weight(i, j) * y[k].to_f64().unwrap() * v[k].to_f64().unwrap() / (c[k] * c[k]);
            }
        }
    }
    Ok(acc)
}
