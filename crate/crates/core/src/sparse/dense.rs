use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use super::CsrMatrix;
use crate::error::LinalgError;

/// Largest dense problem accepted by the verification routines.
pub const DENSE_GUARD: usize = 2000;

fn guard(n: usize) -> Result<(), LinalgError> {
    if n > DENSE_GUARD {
        Err(LinalgError::TooLarge {
            size: n,
            limit: DENSE_GUARD,
        })
    } else {
        Ok(())
    }
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn dense_eig_sym(a: &DMatrix<f64>) -> Result<Vec<f64>, LinalgError> {
    guard(a.nrows())?;
    if a.nrows() != a.ncols() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.nrows(),
            got: a.ncols(),
        });
    }
    let sym = (a + a.transpose()) * 0.5;
    Ok(sorted(SymmetricEigen::new(sym).eigenvalues.iter().copied().collect()))
}

/// Ascending eigenvalues of `A q = lambda B q` with `B` SPD, computed from
/// `L^{-1} A L^{-T}` where `B = L L^T`.
pub fn dense_geig_sym(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Vec<f64>, LinalgError> {
    guard(a.nrows())?;
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.nrows(),
            got: b.nrows(),
        });
    }
    let chol = Cholesky::new(b.clone()).ok_or(LinalgError::NotSpd)?;
    let l = chol.l();
    let linv_a = l
        .solve_lower_triangular(a)
        .ok_or(LinalgError::NotSpd)?;
    let c = l
        .solve_lower_triangular(&linv_a.transpose())
        .ok_or(LinalgError::NotSpd)?;
    dense_eig_sym(&c)
}

/// Dense Cholesky factorization of a sparse SPD matrix.
#[derive(Debug, Clone)]
pub struct DenseCholesky {
    chol: Cholesky<f64, Dyn>,
}

impl DenseCholesky {
    pub fn new(a: &CsrMatrix) -> Result<Self, LinalgError> {
        guard(a.nrows())?;
        Cholesky::new(a.to_dense())
            .map(|chol| DenseCholesky { chol })
            .ok_or(LinalgError::NotSpd)
    }

    pub fn solve_into(&self, r: &[f64], z: &mut [f64]) {
        let x = self.chol.solve(&DVector::from_column_slice(r));
        z.copy_from_slice(x.as_slice());
    }

    pub fn l(&self) -> DMatrix<f64> {
        self.chol.l()
    }
}
