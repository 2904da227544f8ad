use datasets::TraceDataset;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::CoreError;

/// Harmonic functions whose images are recovered: `1`, `x1`, `x2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Harmonic {
    Constant,
    X1,
    X2,
}

pub const HARMONICS: [Harmonic; 3] = [Harmonic::Constant, Harmonic::X1, Harmonic::X2];

impl Harmonic {
    pub fn name(self) -> &'static str {
        match self {
            Harmonic::Constant => "pi0",
            Harmonic::X1 => "pi1",
            Harmonic::X2 => "pi2",
        }
    }
}

/// How the one-sided limit `t -> T - xi - 0` of a sampled series is taken.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JumpRule {
    /// Mean over a window of `width` temporal spacings before the jump.
    Mean { width: f64 },
    /// Gaussian-weighted local linear fit over three bandwidths before the
    /// jump, extrapolated to it; `bandwidth` in temporal spacings.
    LocalLinear { bandwidth: f64 },
}

impl Default for JumpRule {
    fn default() -> Self {
        JumpRule::LocalLinear { bandwidth: 0.75 }
    }
}

impl JumpRule {
    /// Weights `q` with `limit = sum q[i] y[start + i]` for a jump at sample `n0`.
    pub fn weights(&self, n0: usize, step: usize) -> (usize, Vec<f64>) {
        match *self {
            JumpRule::Mean { width } => {
                let w = ((width * step as f64).round() as usize).clamp(1, n0.max(1));
                let start = n0.saturating_sub(w);
                let len = n0 - start;
                (start, vec![1.0 / len.max(1) as f64; len])
            }
            JumpRule::LocalLinear { bandwidth } => {
                let b = bandwidth * step as f64;
                let start = n0.saturating_sub(((3.0 * b) as usize).max(2));
                let taus: Vec<f64> = (start..n0).map(|n| (n as f64 - n0 as f64) / b).collect();
                let ws: Vec<f64> = taus.iter().map(|t| (-0.5 * t * t).exp()).collect();
                let s0: f64 = ws.iter().sum();
                let s1: f64 = ws.iter().zip(&taus).map(|(w, t)| w * t).sum();
                let s2: f64 = ws.iter().zip(&taus).map(|(w, t)| w * t * t).sum();
                let det = s0 * s2 - s1 * s1;
                let q = ws.iter().zip(&taus).map(|(w, t)| w * (s2 - s1 * t) / det).collect();
                (start, q)
            }
        }
    }
}

/// Gram matrix, right-hand sides and jump functionals of the connecting responses.
#[derive(Clone, Debug)]
pub struct Assembly {
    pub gram: DMatrix<f64>,
    pub rhs: [DVector<f64>; 3],
    /// `|G - G^T| / |G|` before symmetrization (Frobenius).
    pub symmetry_defect: f64,
    pub gammas: Vec<f64>,
    pub xis: Vec<f64>,
    /// `jumps[(k * n_xi + l) * n_gamma + g]`: the jump rule applied at `T - xi_l`
    /// to the connecting response of control `k` at boundary point `g`.
    pub jumps: Vec<f64>,
}

impl Assembly {
    pub fn len(&self) -> usize {
        self.gram.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn jump(&self, k: usize, l: usize) -> &[f64] {
        let (nx, ng) = (self.xis.len(), self.gammas.len());
        &self.jumps[(k * nx + l) * ng..(k * nx + l + 1) * ng]
    }
}

fn trapezoid(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    if n > 0 {
        w[0] *= 0.5;
        w[n - 1] *= 0.5;
    }
    w
}

/// Half the fold of the integrated trace of control `k`: the connecting operator
/// applied to `f_k`, on the support columns over `[0, T]` (column outer).
pub fn connecting_response(ds: &TraceDataset, k: usize) -> Vec<f64> {
    let n2 = ds.n_time_double();
    let nt = ds.n_time() - 1;
    let g = ds.integrated_trace(k);
    let mut out = Vec::with_capacity(g.len() / n2 * (nt + 1));
    for col in g.chunks_exact(n2) {
        out.extend((0..=nt).map(|n| 0.5 * (col[n] - col[2 * nt - n])));
    }
    out
}

pub fn assemble(ds: &TraceDataset, rule: &JumpRule) -> Result<Assembly, CoreError> {
    let mf = &ds.manifest;
    let basis = mf.basis()?;
    let n = ds.len();
    let nt = mf.horizon_steps;
    let step = mf.step_samples();
    let dt = mf.dt;
    let h = mf.grid.h1;
    let gammas = mf.support_gammas();
    let ng = gammas.len();
    let xis = mf.xis();
    let nx = xis.len();
    let wg = trapezoid(ng, h);
    let wt = trapezoid(nt + 1, dt);
    let phi: Vec<Vec<f64>> = (0..basis.n_gamma).map(|l| gammas.iter().map(|&g| basis.spatial(l, g)).collect()).collect();
    let psi: Vec<Vec<f64>> = (0..basis.n_t).map(|m| ds.temporal(&basis, m)).collect();
    let rules: Vec<(usize, Vec<f64>)> = (0..nx).map(|l| rule.weights(nt - l * step, step)).collect();

    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|k| {
            let cf = connecting_response(ds, k);
            let proj: Vec<Vec<f64>> = phi
                .iter()
                .map(|p| {
                    let mut acc = vec![0.0; nt + 1];
                    for (g, col) in cf.chunks_exact(nt + 1).enumerate() {
                        let w = wg[g] * p[g];
                        for (a, v) in acc.iter_mut().zip(col) {
                            *a += w * v;
                        }
                    }
                    acc
                })
                .collect();
            let row: Vec<f64> = (0..n)
                .map(|j| {
                    let (l, m) = basis.split(j);
                    proj[l].iter().zip(&psi[m]).zip(&wt).map(|((a, b), c)| a * b * c).sum()
                })
                .collect();
            let mut jumps = Vec::with_capacity(nx * ng);
            for (start, q) in &rules {
                for col in cf.chunks_exact(nt + 1) {
                    jumps.push(q.iter().zip(&col[*start..]).map(|(a, b)| a * b).sum());
                }
            }
            (row, jumps)
        })
        .collect();

    let mut gram = DMatrix::zeros(n, n);
    let mut jumps = Vec::with_capacity(n * nx * ng);
    for (i, (row, jk)) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            gram[(i, j)] = v;
        }
        jumps.extend(jk);
    }
    if gram.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::NonFinite("Gram matrix".into()));
    }
    let norm = gram.norm();
    let symmetry_defect = if norm > 0.0 { (&gram - gram.transpose()).norm() / norm } else { 0.0 };
    let gram = (&gram + gram.transpose()) * 0.5;

    // right-hand sides
    let strip: Vec<f64> = mf.strip_gammas();
    let ws = trapezoid(strip.len(), h);
    let lever: Vec<f64> = (0..=nt).map(|q| (mf.horizon - q as f64 * dt) * wt[q]).collect();
    let moments: Vec<[Vec<f64>; 2]> = ds
        .response
        .iter()
        .map(|r| {
            let mut m0 = vec![0.0; nt + 1];
            let mut m1 = vec![0.0; nt + 1];
            for (g, col) in r.chunks_exact(nt + 1).enumerate() {
                for (q, v) in col.iter().enumerate() {
                    m0[q] += ws[g] * v;
                    m1[q] += ws[g] * strip[g] * v;
                }
            }
            [m0, m1]
        })
        .collect();
    let mut rhs: [DVector<f64>; 3] = [DVector::zeros(n), DVector::zeros(n), DVector::zeros(n)];
    for k in 0..n {
        let (l, m) = basis.split(k);
        let shift = m * step;
        for (a, mom) in moments[l].iter().enumerate() {
            rhs[a][k] = (shift..=nt).map(|q| lever[q] * mom[q - shift]).sum();
        }
        let mass: f64 = phi[l].iter().zip(&wg).map(|(a, b)| a * b).sum();
        rhs[2][k] = -mass * psi[m].iter().zip(&lever).map(|(a, b)| a * b).sum::<f64>();
    }
    if rhs.iter().any(|b| b.iter().any(|v| !v.is_finite())) {
        return Err(CoreError::NonFinite("right-hand side".into()));
    }
    Ok(Assembly { gram, rhs, symmetry_defect, gammas, xis, jumps })
}
