//! Dense factorisations shared by the engine.

use ndarray::{Array1, Array2, ArrayView2};
use ndarray_linalg::{Cholesky, Diag, SolveTriangular, UPLO};

use crate::error::{Error, Result};

/// Relative jitter levels tried after a plain factorisation fails.
const JITTER: [f64; 4] = [1e-10, 1e-8, 1e-6, 1e-4];

/// Lower Cholesky factor of a symmetric matrix.
///
/// On failure, `ε · trace / dim` is added to the diagonal with `ε` stepping
/// up from `1e-10`; each retry is logged.
pub(crate) fn cholesky(a: &Array2<f64>, what: &'static str) -> Result<Array2<f64>> {
    if a.nrows() == 0 {
        return Ok(Array2::zeros((0, 0)));
    }
    if let Ok(l) = a.cholesky(UPLO::Lower) {
        if l.diag().iter().all(|v| v.is_finite() && *v > 0.0) {
            return Ok(l);
        }
    }
    let d = a.nrows() as f64;
    let scale = match a.diag().sum() / d {
        s if s > 0.0 && s.is_finite() => s,
        _ => 1.0,
    };
    for eps in JITTER {
        let mut b = a.clone();
        b.diag_mut().mapv_inplace(|v| v + eps * scale);
        if let Ok(l) = b.cholesky(UPLO::Lower) {
            if l.diag().iter().all(|v| v.is_finite() && *v > 0.0) {
                log::warn!("{what}: added diagonal jitter {:.3e}", eps * scale);
                return Ok(l);
            }
        }
    }
    Err(Error::NotPositiveDefinite(what))
}

/// Solves `L X = B` for lower-triangular `L`.
pub(crate) fn solve_lower(l: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    if l.nrows() == 0 {
        return b.clone();
    }
    l.solve_triangular(UPLO::Lower, Diag::NonUnit, b)
        .expect("triangular solve with positive diagonal")
}

pub(crate) fn solve_lower_vec(l: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    if l.nrows() == 0 {
        return b.clone();
    }
    l.solve_triangular(UPLO::Lower, Diag::NonUnit, b)
        .expect("triangular solve with positive diagonal")
}

/// Solves `Lᵀ x = b` for lower-triangular `L`.
pub(crate) fn solve_lower_t_vec(l: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    if l.nrows() == 0 {
        return b.clone();
    }
    let lt: ArrayView2<f64> = l.t();
    lt.solve_triangular(UPLO::Upper, Diag::NonUnit, b)
        .expect("triangular solve with positive diagonal")
}

/// Solves `L Lᵀ x = b`.
pub(crate) fn chol_solve_vec(l: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    solve_lower_t_vec(l, &solve_lower_vec(l, b))
}

/// Copies the lower triangle onto the upper one.
pub(crate) fn symmetrize(a: &mut Array2<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (a[[i, j]] + a[[j, i]]);
            a[[i, j]] = v;
            a[[j, i]] = v;
        }
    }
}
