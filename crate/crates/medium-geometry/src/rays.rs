//! Normal rays of the travel-time metric `c^-2 |dx|^2`, parametrized by c-length.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::field::SpeedSampler;
use crate::{MediumError, MediumField};

/// Transverse spreading below this fraction of its boundary value counts as a caustic.
pub const CAUSTIC_THRESHOLD: f64 = 1e-3;

/// Semigeodesic coordinates sampled on a (gamma, xi) lattice; arrays are gamma-major.
#[derive(Clone, Debug)]
pub struct RayChart {
    pub gammas: Vec<f64>,
    pub xis: Vec<f64>,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    /// Ray spreading J (signed; positive away from caustics).
    pub spreading: Vec<f64>,
    pub beta: Vec<f64>,
    pub regular: bool,
    /// First sample (gamma, xi) where the caustic test fired.
    pub caustic: Option<(f64, f64)>,
}

impl RayChart {
    #[inline]
    pub fn idx(&self, g: usize, k: usize) -> usize {
        g * self.xis.len() + k
    }

    pub fn position(&self, g: usize, k: usize) -> (f64, f64) {
        let n = self.idx(g, k);
        (self.x1[n], self.x2[n])
    }

    /// CSV with columns gamma, xi, x1, x2, J, beta.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "gamma,xi,x1,x2,J,beta")?;
        for (g, &gamma) in self.gammas.iter().enumerate() {
            for (k, &xi) in self.xis.iter().enumerate() {
                let n = self.idx(g, k);
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    gamma, xi, self.x1[n], self.x2[n], self.spreading[n], self.beta[n]
                )?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
struct State {
    x1: f64,
    x2: f64,
    p1: f64,
    p2: f64,
}

fn rhs(s: &SpeedSampler, st: &State) -> State {
    let (c, c1, c2) = s.eval(st.x1, st.x2);
    let c2p = c * c;
    State { x1: c2p * st.p1, x2: c2p * st.p2, p1: -c1 / c, p2: -c2 / c }
}

fn axpy(a: &State, h: f64, k: &State) -> State {
    State { x1: a.x1 + h * k.x1, x2: a.x2 + h * k.x2, p1: a.p1 + h * k.p1, p2: a.p2 + h * k.p2 }
}

fn rk4_step(s: &SpeedSampler, st: &State, h: f64) -> State {
    let k1 = rhs(s, st);
    let k2 = rhs(s, &axpy(st, 0.5 * h, &k1));
    let k3 = rhs(s, &axpy(st, 0.5 * h, &k2));
    let k4 = rhs(s, &axpy(st, h, &k3));
    State {
        x1: st.x1 + h / 6.0 * (k1.x1 + 2.0 * k2.x1 + 2.0 * k3.x1 + k4.x1),
        x2: st.x2 + h / 6.0 * (k1.x2 + 2.0 * k2.x2 + 2.0 * k3.x2 + k4.x2),
        p1: st.p1 + h / 6.0 * (k1.p1 + 2.0 * k2.p1 + 2.0 * k3.p1 + k4.p1),
        p2: st.p2 + h / 6.0 * (k1.p2 + 2.0 * k2.p2 + 2.0 * k3.p2 + k4.p2),
    }
}

/// One ray from `(gamma, 0)` launched along `-nu`; returns positions and
/// velocities `dx/dxi` at every sample, with `substeps` RK4 steps per sample.
fn shoot(
    s: &SpeedSampler,
    medium: &MediumField,
    gamma: f64,
    n: usize,
    dxi: f64,
    substeps: usize,
) -> Result<Vec<State>, MediumError> {
    let c0 = medium.sample(gamma, 0.0);
    let mut st = State { x1: gamma, x2: 0.0, p1: 0.0, p2: -1.0 / c0 };
    let mut out = Vec::with_capacity(n + 1);
    out.push(st);
    let h = dxi / substeps as f64;
    let grid = medium.grid();
    for k in 1..=n {
        for _ in 0..substeps {
            st = rk4_step(s, &st, h);
        }
        if !grid.contains(st.x1, st.x2) || !st.x1.is_finite() {
            return Err(MediumError::RayLeftGrid { gamma, xi: k as f64 * dxi });
        }
        out.push(st);
    }
    Ok(out)
}

/// Traces normal rays from each `gamma` up to c-length `horizon` with step close to `dxi`.
pub fn trace_rays(medium: &MediumField, gammas: &[f64], dxi: f64, horizon: f64) -> Result<RayChart, MediumError> {
    trace_rays_with(medium, gammas, dxi, horizon, 4)
}

/// As [`trace_rays`] with an explicit number of RK4 substeps per sample.
pub fn trace_rays_with(
    medium: &MediumField,
    gammas: &[f64],
    dxi: f64,
    horizon: f64,
    substeps: usize,
) -> Result<RayChart, MediumError> {
    if !(dxi > 0.0) || !(horizon > 0.0) {
        return Err(MediumError::Parameter(format!("need positive xi step and horizon, got {dxi}, {horizon}")));
    }
    let n = (horizon / dxi).round().max(1.0) as usize;
    let step = horizon / n as f64;
    let xis: Vec<f64> = (0..=n).map(|k| k as f64 * step).collect();
    let sampler = SpeedSampler::new(medium);
    let eps = 0.01 * medium.grid().h1;
    let substeps = substeps.max(1);

    let rays: Vec<Result<_, MediumError>> = gammas
        .par_iter()
        .map(|&g| {
            let mid = shoot(&sampler, medium, g, n, step, substeps)?;
            let lo = shoot(&sampler, medium, g - eps, n, step, substeps)?;
            let hi = shoot(&sampler, medium, g + eps, n, step, substeps)?;
            let mut x1 = Vec::with_capacity(n + 1);
            let mut x2 = Vec::with_capacity(n + 1);
            let mut jac = Vec::with_capacity(n + 1);
            let mut beta = Vec::with_capacity(n + 1);
            let c_boundary = medium.sample(g, 0.0);
            for k in 0..=n {
                let st = &mid[k];
                let c = medium.sample(st.x1, st.x2);
                let (v1, v2) = (c * c * st.p1, c * c * st.p2);
                let (t1, t2) = ((hi[k].x1 - lo[k].x1) / (2.0 * eps), (hi[k].x2 - lo[k].x2) / (2.0 * eps));
                let vn = (v1 * v1 + v2 * v2).sqrt();
                let j = if k == 0 { 1.0 } else { -(t1 * v2 - t2 * v1) / vn };
                let kappa0 = 1.0 / c_boundary;
                let kappa = j / c;
                x1.push(if k == 0 { g } else { st.x1 });
                x2.push(if k == 0 { 0.0 } else { st.x2 });
                jac.push(j);
                beta.push(if kappa > 0.0 { (kappa0 * kappa).sqrt() } else { 0.0 });
            }
            Ok((x1, x2, jac, beta))
        })
        .collect();

    let mut chart = RayChart {
        gammas: gammas.to_vec(),
        xis,
        x1: Vec::with_capacity(gammas.len() * (n + 1)),
        x2: Vec::with_capacity(gammas.len() * (n + 1)),
        spreading: Vec::with_capacity(gammas.len() * (n + 1)),
        beta: Vec::with_capacity(gammas.len() * (n + 1)),
        regular: true,
        caustic: None,
    };
    for (gi, r) in rays.into_iter().enumerate() {
        let (x1, x2, jac, beta) = r?;
        for (k, &j) in jac.iter().enumerate() {
            if chart.caustic.is_none() && j < CAUSTIC_THRESHOLD {
                chart.caustic = Some((gammas[gi], chart.xis[k]));
                chart.regular = false;
            }
        }
        chart.x1.extend(x1);
        chart.x2.extend(x2);
        chart.spreading.extend(jac);
        chart.beta.extend(beta);
    }
    Ok(chart)
}

/// Travel time (c-length) of the chart polyline between consecutive samples,
/// measured with a fine midpoint rule along the straight chord.
pub fn segment_c_lengths(medium: &MediumField, chart: &RayChart, g: usize) -> Vec<f64> {
    let m = 64;
    (1..chart.xis.len())
        .map(|k| {
            let (a1, a2) = chart.position(g, k - 1);
            let (b1, b2) = chart.position(g, k);
            let len = ((b1 - a1).powi(2) + (b2 - a2).powi(2)).sqrt();
            (0..m)
                .map(|q| {
                    let s = (q as f64 + 0.5) / m as f64;
                    1.0 / medium.sample(a1 + s * (b1 - a1), a2 + s * (b2 - a2))
                })
                .sum::<f64>()
                * len
                / m as f64
        })
        .collect()
}
