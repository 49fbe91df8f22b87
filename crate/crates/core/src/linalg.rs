//! Thin SVD and minimum-norm least squares on nalgebra matrices, computed
//! with faer. nalgebra's own SVD returns factors that do not reproduce
//! rank-deficient inputs, which breaks noiseless exactness.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `m = u * diag(s) * v^T` with `s` non-increasing.
#[derive(Debug, Clone)]
pub(crate) struct Svd {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub v: DMatrix<f64>,
}

pub(crate) fn svd(m: &DMatrix<f64>) -> Result<Svd> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalDegeneracy("non-finite matrix entry".into()));
    }
    let f = faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let d = f
        .thin_svd()
        .map_err(|e| Error::NumericalDegeneracy(format!("SVD did not converge: {e:?}")))?;
    let (u, s, v) = (d.U(), d.S().column_vector(), d.V());
    Ok(Svd {
        u: DMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)]),
        s: DVector::from_fn(s.nrows(), |i, _| s[i]),
        v: DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)]),
    })
}

impl Svd {
    /// Number of singular values above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.s.iter().filter(|s| **s > tol).count()
    }

    /// Minimum-norm least-squares solution of `m x = b`, ignoring singular
    /// values at or below `tol`.
    pub fn solve(&self, b: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
        let mut utb = self.u.transpose() * b;
        for (i, s) in self.s.iter().enumerate() {
            let inv = if *s > tol { 1.0 / s } else { 0.0 };
            utb.row_mut(i).scale_mut(inv);
        }
        &self.v * utb
    }
}
