use datasets::TraceDataset;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble, Harmonic, JumpRule, HARMONICS};
use crate::image::{smooth_image, ImageField, SmoothingSchedule};
use crate::linalg::{alpha_for_residual, condition_number, principal, subvector, tikhonov_solve};
use crate::CoreError;

/// Source of the Gram matrix and right-hand sides.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// From boundary traces only.
    #[default]
    InverseData,
    /// From interior products of the simulated waves (needs the oracle block).
    Pseudo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InversionConfig {
    pub mode: Mode,
    pub alpha: f64,
    /// When set, `alpha` is replaced by the largest value meeting this relative
    /// residual on the full system for the constant harmonic.
    pub residual_target: Option<f64>,
    pub jump: JumpRule,
    pub smoothing: SmoothingSchedule,
    /// Map nodes with `|pi0| < floor_fraction * median |pi0|` are masked.
    pub floor_fraction: f64,
    /// Fail when more than this fraction of the map is masked.
    pub max_masked_fraction: f64,
    /// Rows on each side used for the least-squares slope `dx/dxi`.
    pub derivative_half_window: usize,
}

impl Default for InversionConfig {
    fn default() -> Self {
        InversionConfig {
            mode: Mode::InverseData,
            alpha: 1e-5,
            residual_target: None,
            jump: JumpRule::default(),
            smoothing: SmoothingSchedule::default(),
            floor_fraction: 1e-2,
            max_masked_fraction: 0.5,
            derivative_half_window: 1,
        }
    }
}

/// Diagnostics of the system for the delay `xi`: the delayed family of order `order`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XiReport {
    pub xi: f64,
    pub order: usize,
    pub condition: f64,
    /// Relative residuals for `pi0, pi1, pi2`.
    pub residual: [f64; 3],
    /// Squared norms `<c, b>` of the projections of the harmonics.
    pub projection: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub mode: Mode,
    pub alpha: f64,
    pub residual_target: Option<f64>,
    pub symmetry_defect: f64,
    pub jump: JumpRule,
    pub smoothing: SmoothingSchedule,
    pub floor: f64,
    pub masked_fraction: f64,
    /// Log-log slope of the condition number against `xi`.
    pub condition_slope: f64,
    pub per_xi: Vec<XiReport>,
}

#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub horizon: f64,
    pub gammas: Vec<f64>,
    pub xis: Vec<f64>,
    pub raw: Vec<ImageField>,
    pub smooth: Vec<ImageField>,
    /// Recovered map `(gamma, xi) -> x`, gamma-major.
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub valid: Vec<bool>,
    /// Recovered speed `|dx/dxi|` on the chart (`NaN` where masked).
    pub speed: Vec<f64>,
    pub report: RunReport,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Least-squares slope of `ln y` against `ln x` over finite points.
pub(crate) fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && b.is_finite() && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

pub fn reconstruct(ds: &TraceDataset, cfg: &InversionConfig) -> Result<Reconstruction, CoreError> {
    if !(cfg.alpha >= 0.0) || !(cfg.floor_fraction >= 0.0) {
        return Err(CoreError::Parameter("alpha and floor fraction must be non-negative".into()));
    }
    let mf = &ds.manifest;
    let basis = mf.basis()?;
    let asm = assemble(ds, &cfg.jump)?;
    let (gram, rhs) = match cfg.mode {
        Mode::InverseData => (asm.gram.clone(), asm.rhs.clone()),
        Mode::Pseudo => {
            let o = ds.oracle.as_ref().ok_or(CoreError::MissingOracle)?;
            let n = ds.len();
            let g = DMatrix::from_row_slice(n, n, &o.gram);
            let g = (&g + g.transpose()) * 0.5;
            let b = [0, 1, 2].map(|a| DVector::from_column_slice(&o.rhs[a]));
            (g, b)
        }
    };
    let alpha = match cfg.residual_target {
        Some(t) => alpha_for_residual(&gram, &rhs[0], t)?,
        None => cfg.alpha,
    };

    let nt = basis.n_t;
    let families: Vec<Vec<usize>> = (1..=nt).map(|l| basis.delayed_family(l)).collect();
    let solved: Vec<Result<(XiReport, Vec<DVector<f64>>), CoreError>> = families
        .par_iter()
        .enumerate()
        .map(|(i, fam)| {
            let g = principal(&gram, fam);
            let bs: Vec<DVector<f64>> = rhs.iter().map(|b| subvector(b, fam)).collect();
            let sol = tikhonov_solve(&g, &bs, alpha)?;
            let rep = XiReport {
                xi: (i + 1) as f64 * mf.xi_step,
                order: fam.len(),
                condition: condition_number(&g),
                residual: [0, 1, 2].map(|a| sol[a].residual),
                projection: [0, 1, 2].map(|a| sol[a].coeffs.dot(&bs[a])),
            };
            Ok((rep, sol.into_iter().map(|s| s.coeffs).collect()))
        })
        .collect();
    let mut per_xi = Vec::with_capacity(nt);
    let mut coeffs = Vec::with_capacity(nt);
    for r in solved {
        let (rep, c) = r?;
        per_xi.push(rep);
        coeffs.push(c);
    }
    let full = &coeffs[nt - 1];

    // images: the series of c^T - pad(c^xi) evaluated just before T - xi
    let (ng, nx) = (asm.gammas.len(), asm.xis.len());
    let n = ds.len();
    let mut raw: Vec<ImageField> = HARMONICS
        .iter()
        .map(|&h| ImageField { harmonic: h, gammas: asm.gammas.clone(), xis: asm.xis.clone(), values: vec![0.0; ng * nx] })
        .collect();
    for l in 0..nx {
        for (a, img) in raw.iter_mut().enumerate() {
            let mut d = full[a].clone();
            if l > 0 {
                for (q, &k) in families[l - 1].iter().enumerate() {
                    d[k] -= coeffs[l - 1][a][q];
                }
            }
            for k in 0..n {
                if d[k] == 0.0 {
                    continue;
                }
                for (g, v) in asm.jump(k, l).iter().enumerate() {
                    img.values[g * nx + l] += d[k] * v;
                }
            }
        }
    }
    let smooth: Vec<ImageField> = raw.iter().map(|img| smooth_image(img, &cfg.smoothing, mf.horizon)).collect();

    let s0 = &smooth[0].values;
    let floor = cfg.floor_fraction * median(s0.iter().map(|v| v.abs()).collect());
    let valid: Vec<bool> = s0.iter().map(|v| v.is_finite() && v.abs() >= floor && v.abs() > 0.0).collect();
    let x1: Vec<f64> = (0..ng * nx).map(|i| if valid[i] { smooth[1].values[i] / s0[i] } else { f64::NAN }).collect();
    let x2: Vec<f64> = (0..ng * nx).map(|i| if valid[i] { smooth[2].values[i] / s0[i] } else { f64::NAN }).collect();
    let speed = chart_speed(&x1, &x2, &valid, nx, mf.xi_step, cfg.derivative_half_window);
    let masked = valid.iter().filter(|v| !**v).count() as f64 / valid.len().max(1) as f64;
    if masked > cfg.max_masked_fraction {
        return Err(CoreError::Masked { fraction: masked });
    }
    let xs: Vec<f64> = per_xi.iter().map(|r| r.xi).collect();
    let ks: Vec<f64> = per_xi.iter().map(|r| r.condition).collect();
    let report = RunReport {
        mode: cfg.mode,
        alpha,
        residual_target: cfg.residual_target,
        symmetry_defect: asm.symmetry_defect,
        jump: cfg.jump,
        smoothing: cfg.smoothing,
        floor,
        masked_fraction: masked,
        condition_slope: loglog_slope(&xs, &ks),
        per_xi,
    };
    Ok(Reconstruction {
        horizon: mf.horizon,
        gammas: asm.gammas,
        xis: asm.xis,
        raw,
        smooth,
        x1,
        x2,
        valid,
        speed,
        report,
    })
}

/// `|dx/dxi|` from least-squares slopes over up to `half` valid neighbours on
/// each side along a gamma row; `half = 1` gives central differences inside
/// and one-sided differences at the ends.
fn chart_speed(x1: &[f64], x2: &[f64], valid: &[bool], nx: usize, dxi: f64, half: usize) -> Vec<f64> {
    let mut c = vec![f64::NAN; x1.len()];
    let half = half.max(1);
    for (r, row) in valid.chunks_exact(nx).enumerate() {
        let base = r * nx;
        for l in 0..nx {
            if !row[l] {
                continue;
            }
            let mut lo = l;
            while lo > 0 && l - lo < half && row[lo - 1] {
                lo -= 1;
            }
            let mut hi = l;
            while hi + 1 < nx && hi - l < half && row[hi + 1] {
                hi += 1;
            }
            if lo == hi {
                continue;
            }
            let xm = (lo..=hi).map(|q| q as f64).sum::<f64>() / (hi - lo + 1) as f64;
            let sxx: f64 = (lo..=hi).map(|q| (q as f64 - xm).powi(2)).sum();
            let slope = |x: &[f64]| (lo..=hi).map(|q| (q as f64 - xm) * x[base + q]).sum::<f64>() / (sxx * dxi);
            let (d1, d2) = (slope(x1), slope(x2));
            c[base + l] = (d1 * d1 + d2 * d2).sqrt();
        }
    }
    c
}

impl Harmonic {
    pub fn index(self) -> usize {
        self as usize
    }
}
