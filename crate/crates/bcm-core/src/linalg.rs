use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::CoreError;

/// Regularized coefficients and the relative residual `|G c - b| / |b|`.
#[derive(Clone, Debug)]
pub struct Solution {
    pub coeffs: DVector<f64>,
    pub residual: f64,
}

pub fn principal(g: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| g[(idx[i], idx[j])])
}

pub fn subvector(b: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&i| b[i]))
}

fn relative_residual(g: &DMatrix<f64>, c: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let nb = b.norm();
    let r = (g * c - b).norm();
    if nb > 0.0 {
        r / nb
    } else {
        r
    }
}

/// Solves `(G + alpha I) c = b` for every right-hand side with one Cholesky factorization.
pub fn tikhonov_solve(g: &DMatrix<f64>, bs: &[DVector<f64>], alpha: f64) -> Result<Vec<Solution>, CoreError> {
    let n = g.nrows();
    if n == 0 {
        return Ok(bs.iter().map(|_| Solution { coeffs: DVector::zeros(0), residual: 0.0 }).collect());
    }
    let mut a = g.clone();
    for i in 0..n {
        a[(i, i)] += alpha;
    }
    let chol = a.cholesky().ok_or(CoreError::NotPositiveDefinite { order: n, alpha })?;
    let out: Vec<Solution> = bs
        .iter()
        .map(|b| {
            let coeffs = chol.solve(b);
            let residual = relative_residual(g, &coeffs, b);
            Solution { coeffs, residual }
        })
        .collect();
    if out.iter().any(|s| s.coeffs.iter().any(|v| !v.is_finite())) {
        return Err(CoreError::NonFinite("regularized solution".into()));
    }
    Ok(out)
}

/// `lambda_max / lambda_min` of a symmetric matrix (infinite if not positive).
pub fn condition_number(g: &DMatrix<f64>) -> f64 {
    if g.nrows() == 0 {
        return 1.0;
    }
    let ev = SymmetricEigen::new(g.clone()).eigenvalues;
    let max = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = ev.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Largest `alpha` whose residual stays within `target`, by bisection in `log alpha`.
pub fn alpha_for_residual(g: &DMatrix<f64>, b: &DVector<f64>, target: f64) -> Result<f64, CoreError> {
    if !(target > 0.0) {
        return Err(CoreError::Parameter(format!("residual target must be positive, got {target}")));
    }
    let scale = g.diagonal().iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let residual = |alpha: f64| -> f64 {
        tikhonov_solve(g, std::slice::from_ref(b), alpha).map_or(f64::INFINITY, |s| s[0].residual)
    };
    let (mut lo, mut hi) = ((scale * 1e-14).ln(), (scale * 1e2).ln());
    let best = residual(lo.exp());
    if best > target {
        return Err(CoreError::ResidualTarget { target, best });
    }
    if residual(hi.exp()) <= target {
        return Ok(hi.exp());
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if residual(mid.exp()) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo.exp())
}
