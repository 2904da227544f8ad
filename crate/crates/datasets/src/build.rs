use controls::{BasisSpec, ControlBasis};
use medium_geometry::{trace_rays, MediumField};
use rayon::prelude::*;
use wavefield::{inner_product_h, RunSpec, SeparableDrive, Solver64, SolverConfig};

use crate::dataset::steps;
use crate::{DatasetError, Manifest, OracleBlock, TraceDataset, FORMAT_VERSION};

#[derive(Clone, Debug, Default)]
pub struct BuildOptions {
    pub solver: SolverConfig,
    /// Also record interior products of the final-time waves.
    pub oracle: bool,
    /// Skip the ray-chart regularity check.
    pub skip_regularity_check: bool,
}

struct PerSpatial {
    response: Vec<f64>,
    generator: Vec<f64>,
    direct: Vec<Vec<f64>>,
    snapshots: Vec<Vec<f64>>,
}

/// Runs the forward solves for every spatial function of the basis.
pub fn build_dataset(
    medium: &MediumField,
    spec: &BasisSpec,
    horizon: f64,
    half_width: f64,
    opts: &BuildOptions,
) -> Result<TraceDataset, DatasetError> {
    if spec.n_t == 0 {
        return Err(DatasetError::Mismatch("the basis needs at least one temporal function".into()));
    }
    let step = horizon / spec.n_t as f64;
    let solver = Solver64::new(medium, &opts.solver, step)
        .map_err(|source| DatasetError::Solve { control: "solver setup".into(), source })?;
    let dt = solver.dt();
    let basis = ControlBasis::new(spec, horizon, half_width, dt)?;
    let grid = medium.grid();
    let n_t_steps = steps(horizon, dt);
    let step_n = basis.step_samples();
    let delta_n = basis.delta_samples();

    let support = grid.columns_within(basis.support_half_width());
    let strip = grid.columns_within(basis.support_half_width() + medium.c_star() * horizon);
    if strip.start < 1 || strip.end + 1 > grid.n1 || grid.depth() < medium.c_star() * horizon {
        return Err(DatasetError::Mismatch(format!(
            "grid [{}, {}] x [-{}, 0] does not contain the domain of influence of the strip",
            grid.x1_min,
            grid.x1_max(),
            grid.depth()
        )));
    }

    if !opts.skip_regularity_check && basis.n_gamma > 0 {
        let gammas: Vec<f64> = grid.columns_within(half_width).map(|i| grid.x1(i)).collect();
        let chart = trace_rays(medium, &gammas, 0.25 * step, horizon)?;
        if let Some((gamma, xi)) = chart.caustic {
            return Err(DatasetError::Caustic { gamma, xi });
        }
    }

    let first: Vec<f64> = (0..n_t_steps + 2).map(|n| basis.temporal(0, n as f64 * dt)).collect();
    let shape = basis.temporal_shape();
    let raw = shape.primitive_on_grid(-basis.delta, dt, 2 * n_t_steps + 2);
    let integrated: Vec<f64> = raw.iter().map(|v| v - raw[0]).collect();
    let truncated: Vec<usize> = (0..basis.n_t).filter(|&m| m * step_n + 2 * delta_n + 2 * step_n > n_t_steps).collect();
    let snap_steps: Vec<usize> = (0..basis.n_t).map(|m| n_t_steps - m * step_n).collect();

    let per: Vec<PerSpatial> = (0..basis.n_gamma)
        .into_par_iter()
        .map(|l| {
            let profile: Vec<f64> = support.clone().map(|i| basis.spatial(l, grid.x1(i))).collect();
            let tag = |what: &str| format!("spatial function {l}, {what}");

            let drive = SeparableDrive { first_column: support.start, profile: profile.clone(), signal: first.clone() };
            let mut snapshots = vec![Vec::new(); if opts.oracle { basis.n_t } else { 0 }];
            let spec_r = RunSpec { drive: Some(&drive), n_steps: n_t_steps, trace_columns: strip.clone(), ..RunSpec::default() };
            let response = solver
                .run(&spec_r, &mut |n, u| {
                    if opts.oracle {
                        for (m, &s) in snap_steps.iter().enumerate() {
                            if s == n {
                                snapshots[m] = u.to_vec();
                            }
                        }
                    }
                })
                .map_err(|source| DatasetError::Solve { control: tag("response"), source })?
                .trace;

            let run2 = |signal: Vec<f64>, what: &str| {
                let drive = SeparableDrive { first_column: support.start, profile: profile.clone(), signal };
                let spec = RunSpec {
                    drive: Some(&drive),
                    n_steps: 2 * n_t_steps,
                    trace_columns: support.clone(),
                    ..RunSpec::default()
                };
                solver
                    .run(&spec, &mut |_, _| {})
                    .map(|o| o.trace)
                    .map_err(|source| DatasetError::Solve { control: tag(what), source })
            };
            let generator = run2(integrated.clone(), "integrated tent")?;
            let mut direct = Vec::with_capacity(truncated.len());
            for &m in &truncated {
                let at = |n: usize| n.checked_sub(m * step_n).map_or(0.0, |q| integrated[q]);
                let signal: Vec<f64> = (0..2 * n_t_steps + 2)
                    .map(|n| {
                        if n <= n_t_steps {
                            at(n)
                        } else {
                            (2 * n_t_steps).checked_sub(n).map_or(0.0, at)
                        }
                    })
                    .collect();
                direct.push(run2(signal, &format!("truncated tent {m}"))?);
            }
            Ok(PerSpatial { response, generator, direct, snapshots })
        })
        .collect::<Result<_, DatasetError>>()?;

    let oracle = if opts.oracle { Some(oracle_block(medium, &basis, &per)?) } else { None };

    let mut resolved = spec.clone();
    resolved.delta = Some(basis.delta);
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        scenario: medium.provenance().scenario.clone(),
        medium_hash: medium.content_hash(),
        c_star: medium.c_star(),
        horizon,
        half_width,
        dt,
        horizon_steps: n_t_steps,
        xi_step: basis.step,
        xi_count: basis.n_t,
        strip_columns: [strip.start, strip.end],
        support_columns: [support.start, support.end],
        truncated: truncated.clone(),
        oracle: opts.oracle,
        basis: resolved,
        solver: opts.solver.clone(),
        grid: grid.clone(),
    };
    let mut response = Vec::with_capacity(per.len());
    let mut generator = Vec::with_capacity(per.len());
    let mut by_l = Vec::with_capacity(per.len());
    for p in per {
        response.push(p.response);
        generator.push(p.generator);
        by_l.push(p.direct);
    }
    let mut direct = Vec::with_capacity(truncated.len() * basis.n_gamma);
    for q in 0..truncated.len() {
        for d in by_l.iter_mut() {
            direct.push(std::mem::take(&mut d[q]));
        }
    }
    Ok(TraceDataset { manifest, response, generator, direct, oracle })
}

fn oracle_block(medium: &MediumField, basis: &ControlBasis, per: &[PerSpatial]) -> Result<OracleBlock, DatasetError> {
    let grid = medium.grid();
    let n = basis.len();
    let snaps: Vec<&[f64]> = (0..n)
        .map(|k| {
            let (l, m) = basis.split(k);
            per[l].snapshots[m].as_slice()
        })
        .collect();
    let fields: Vec<Vec<f64>> = vec![
        vec![1.0; grid.len()],
        (0..grid.len()).map(|k| grid.x1(k % grid.n1)).collect(),
        (0..grid.len()).map(|k| grid.x2(k / grid.n1)).collect(),
    ];
    let wrap = |e| DatasetError::Solve { control: "interior products".into(), source: e };
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| if j < i { 0.0 } else { inner_product_h(medium, snaps[i], snaps[j], None).unwrap_or(f64::NAN) }).collect())
        .collect();
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            gram[i * n + j] = rows[i][j];
            gram[j * n + i] = rows[i][j];
        }
    }
    let mut rhs: [Vec<f64>; 3] = Default::default();
    for (r, a) in rhs.iter_mut().zip(&fields) {
        *r = snaps.iter().map(|u| inner_product_h(medium, a.as_slice(), u, None)).collect::<Result<_, _>>().map_err(wrap)?;
    }
    Ok(OracleBlock { gram, rhs })
}
