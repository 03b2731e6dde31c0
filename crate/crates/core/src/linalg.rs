//! Small dense linear-algebra helpers shared by the statistics.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Inverse of a symmetric positive-definite matrix via Cholesky.
///
/// `what` names the matrix in the error when the factorisation fails.
pub fn spd_inverse(m: &DMatrix<f64>, what: &'static str) -> Result<DMatrix<f64>> {
    let chol = m.clone().cholesky().ok_or(Error::SingularCovariance(what))?;
    let inv = chol.inverse();
    if inv.iter().all(|v| v.is_finite()) {
        Ok(inv)
    } else {
        Err(Error::SingularCovariance(what))
    }
}

/// Solves `m x = b` for symmetric positive-definite `m`.
pub fn spd_solve(m: &DMatrix<f64>, b: &DVector<f64>, what: &'static str) -> Result<DVector<f64>> {
    let chol = m.clone().cholesky().ok_or(Error::SingularCovariance(what))?;
    Ok(chol.solve(b))
}

/// `xᵀ M x`.
pub fn quad_form(m: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    x.dot(&(m * x))
}

pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}
