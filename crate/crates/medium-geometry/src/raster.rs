//! Piecewise-linear transfer of fields given on a (gamma, xi) sheet onto grid nodes.

use crate::{Grid, MediumError, RayChart};

/// Rasterizes the triangulated sheet `(x1, x2)[u][v]` (u-major, `nv` per row).
///
/// Returns the coverage mask on grid nodes and, for every input field, its
/// barycentric interpolation at covered nodes (`NaN` elsewhere). Quads with
/// an invalid corner are skipped. Later quads overwrite earlier ones on overlap.
pub fn rasterize_sheet(
    grid: &Grid,
    nv: usize,
    x1: &[f64],
    x2: &[f64],
    fields: &[&[f64]],
    valid: Option<&[bool]>,
) -> (Vec<bool>, Vec<Vec<f64>>) {
    let mut mask = vec![false; grid.len()];
    let mut out: Vec<Vec<f64>> = fields.iter().map(|_| vec![f64::NAN; grid.len()]).collect();
    if nv < 2 || x1.len() < 2 * nv {
        return (mask, out);
    }
    let nu = x1.len() / nv;
    let ok = |n: usize| valid.map_or(true, |v| v[n]) && x1[n].is_finite() && x2[n].is_finite();
    for u in 0..nu - 1 {
        for v in 0..nv - 1 {
            let a = u * nv + v;
            let b = (u + 1) * nv + v;
            let c = (u + 1) * nv + v + 1;
            let d = u * nv + v + 1;
            if !(ok(a) && ok(b) && ok(c) && ok(d)) {
                continue;
            }
            for tri in [[a, b, c], [a, c, d]] {
                fill_triangle(grid, tri, x1, x2, fields, &mut mask, &mut out);
            }
        }
    }
    (mask, out)
}

fn fill_triangle(
    grid: &Grid,
    t: [usize; 3],
    x1: &[f64],
    x2: &[f64],
    fields: &[&[f64]],
    mask: &mut [bool],
    out: &mut [Vec<f64>],
) {
    let (ax, ay) = (x1[t[0]], x2[t[0]]);
    let (bx, by) = (x1[t[1]], x2[t[1]]);
    let (cx, cy) = (x1[t[2]], x2[t[2]]);
    let det = (bx - ax) * (cy - ay) - (cx - ax) * (by - ay);
    if det.abs() < 1e-300 {
        return;
    }
    let xmin = ax.min(bx).min(cx);
    let xmax = ax.max(bx).max(cx);
    let ymin = ay.min(by).min(cy);
    let ymax = ay.max(by).max(cy);
    let i0 = ((xmin - grid.x1_min) / grid.h1).ceil().max(0.0) as usize;
    let i1 = ((xmax - grid.x1_min) / grid.h1).floor();
    let j0 = (-ymax / grid.h2).ceil().max(0.0) as usize;
    let j1 = (-ymin / grid.h2).floor();
    if i1 < 0.0 || j1 < 0.0 {
        return;
    }
    let i1 = (i1 as usize).min(grid.n1 - 1);
    let j1 = (j1 as usize).min(grid.n2 - 1);
    let tol = -1e-10;
    for j in j0..=j1 {
        let py = grid.x2(j);
        for i in i0..=i1 {
            let px = grid.x1(i);
            let l1 = ((px - ax) * (cy - ay) - (cx - ax) * (py - ay)) / det;
            let l2 = ((bx - ax) * (py - ay) - (px - ax) * (by - ay)) / det;
            let l0 = 1.0 - l1 - l2;
            if l0 >= tol && l1 >= tol && l2 >= tol {
                let n = grid.idx(i, j);
                mask[n] = true;
                for (f, o) in fields.iter().zip(out.iter_mut()) {
                    o[n] = l0 * f[t[0]] + l1 * f[t[1]] + l2 * f[t[2]];
                }
            }
        }
    }
}

/// Grid nodes covered by the image of the chart rectangle.
pub fn tube_mask(chart: &RayChart, grid: &Grid) -> Result<Vec<bool>, MediumError> {
    if !chart.regular {
        let (g, xi) = chart.caustic.unwrap_or((f64::NAN, f64::NAN));
        return Err(MediumError::Caustic { gamma: g, xi });
    }
    if chart.gammas.is_empty() {
        return Ok(vec![false; grid.len()]);
    }
    let (mask, _) = rasterize_sheet(grid, chart.xis.len(), &chart.x1, &chart.x2, &[], None);
    Ok(mask)
}

/// Area represented by a node mask (trapezoid weights).
pub fn mask_area(grid: &Grid, mask: &[bool]) -> f64 {
    let mut a = 0.0;
    for j in 0..grid.n2 {
        for i in 0..grid.n1 {
            if mask[grid.idx(i, j)] {
                a += grid.weight(i, j);
            }
        }
    }
    a
}
