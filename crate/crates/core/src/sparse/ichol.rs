use super::{CsrMatrix, Preconditioner};
use crate::error::LinalgError;

const MAX_SHIFT_ATTEMPTS: usize = 20;

/// Lower-triangular incomplete Cholesky factor `L` with `L L^T ~ A + shift I`.
#[derive(Debug, Clone)]
pub struct IcholFactor {
    n: usize,
    /// Column-major storage of L; the first entry of every column is the diagonal.
    columns: Vec<Vec<(usize, f64)>>,
    /// Diagonal shift that was needed to avoid pivot breakdown (0 if none).
    pub shift: f64,
}

impl IcholFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.columns.iter().map(|c| c[0].1).collect()
    }

    /// Dense copy of L, for tests.
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut l = nalgebra::DMatrix::zeros(self.n, self.n);
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, v) in col {
                l[(i, j)] = v;
            }
        }
        l
    }

    /// Solve `L L^T z = r`.
    pub fn solve_into(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
        for (j, col) in self.columns.iter().enumerate() {
            z[j] /= col[0].1;
            let zj = z[j];
            for &(i, l) in &col[1..] {
                z[i] -= l * zj;
            }
        }
        for (j, col) in self.columns.iter().enumerate().rev() {
            let s: f64 = col[1..].iter().map(|&(i, l)| l * z[i]).sum();
            z[j] = (z[j] - s) / col[0].1;
        }
    }
}

impl Preconditioner for IcholFactor {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        self.solve_into(r, z);
    }
}

/// Threshold incomplete Cholesky (left-looking). An entry `l_ij` of column
/// `j` is dropped when `|l_ij| < droptol * ||A(j:n, j)||_1`. On a
/// non-positive pivot the factorization restarts on `A + sigma I` with
/// `sigma <- max(2 sigma, 1e-3 mean(diag A))`.
pub fn ichol_threshold(a: &CsrMatrix, droptol: f64) -> Result<IcholFactor, LinalgError> {
    if a.nrows() != a.ncols() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.nrows(),
            got: a.ncols(),
        });
    }
    if let Some((row, col)) = a.find_asymmetry(1e-12) {
        return Err(LinalgError::NotSymmetric { row, col });
    }
    let diag = a.diagonal();
    let mean_diag = diag.iter().sum::<f64>() / diag.len().max(1) as f64;
    let mut shift = 0.0;
    for _ in 0..=MAX_SHIFT_ATTEMPTS {
        if let Some(columns) = factor(a, droptol, shift) {
            return Ok(IcholFactor {
                n: a.nrows(),
                columns,
                shift,
            });
        }
        shift = f64::max(2.0 * shift, 1e-3 * mean_diag.abs());
    }
    Err(LinalgError::IcholBreakdown {
        attempts: MAX_SHIFT_ATTEMPTS,
    })
}

fn factor(a: &CsrMatrix, droptol: f64, shift: f64) -> Option<Vec<Vec<(usize, f64)>>> {
    let n = a.nrows();
    let mut columns: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    // For each row i: (column k, position of row i inside column k).
    let mut row_lists: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut work = vec![0.0; n];
    let mut marked = vec![false; n];
    let mut touched: Vec<usize> = Vec::new();

    for j in 0..n {
        let (cols, vals) = a.row(j);
        let mut colnorm = 0.0;
        for (&c, &v) in cols.iter().zip(vals) {
            if c >= j {
                work[c] += v;
                colnorm += v.abs();
                if !marked[c] {
                    marked[c] = true;
                    touched.push(c);
                }
            }
        }
        work[j] += shift;
        if !marked[j] {
            marked[j] = true;
            touched.push(j);
        }
        for &(k, pos) in &row_lists[j] {
            let col = &columns[k];
            let ljk = col[pos].1;
            for &(i, lik) in &col[pos..] {
                work[i] -= lik * ljk;
                if !marked[i] {
                    marked[i] = true;
                    touched.push(i);
                }
            }
        }
        let pivot = work[j];
        if !(pivot > 0.0) || !pivot.is_finite() {
            return None;
        }
        let ljj = pivot.sqrt();
        touched.sort_unstable();
        let mut col = Vec::with_capacity(touched.len());
        col.push((j, ljj));
        let threshold = droptol * colnorm;
        for &i in &touched {
            if i > j {
                let l = work[i] / ljj;
                if l != 0.0 && l.abs() >= threshold {
                    row_lists[i].push((j, col.len()));
                    col.push((i, l));
                }
            }
            work[i] = 0.0;
            marked[i] = false;
        }
        touched.clear();
        columns.push(col);
    }
    Some(columns)
}
