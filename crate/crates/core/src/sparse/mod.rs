//! Sparse kernels: CSR storage, threshold incomplete Cholesky, PCG, and
//! dense eigen/Cholesky helpers used for verification-scale problems.

mod csr;
mod dense;
mod ichol;
mod matrix_market;
mod pcg;

pub use csr::{CsrMatrix, TripletBuilder};
pub use dense::{dense_eig_sym, dense_geig_sym, DenseCholesky, DENSE_GUARD};
pub use ichol::{ichol_threshold, IcholFactor};
pub use matrix_market::{read_matrix_market, write_matrix_market, write_vector_market};
pub use pcg::{pcg, PcgReport};

/// Application of an approximate inverse `z = M^{-1} r`.
pub trait Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

/// `M = I`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl Preconditioner for Identity {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += s * x`
#[inline]
pub fn axpy(s: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}
