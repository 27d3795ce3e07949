use super::{axpy, dot, norm2, CsrMatrix, Preconditioner};
use crate::error::LinalgError;

#[derive(Debug, Clone, Default)]
pub struct PcgReport {
    pub iterations: usize,
    pub converged: bool,
    /// Recurrence residual `||r_k||_2 / ||b||_2`, starting with 1.
    pub history: Vec<f64>,
    /// Preconditioned residual `sqrt(r_k^T M^{-1} r_k)`, relative to step 0.
    pub precond_history: Vec<f64>,
    /// `||b - A x||_2 / ||b||_2` at exit.
    pub true_relres: f64,
}

/// Preconditioned conjugate gradients from a zero initial guess. Stops when
/// the true relative residual is at most `tol`.
pub fn pcg(
    a: &CsrMatrix,
    b: &[f64],
    m: &dyn Preconditioner,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, PcgReport), LinalgError> {
    let n = a.nrows();
    if b.len() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let mut x = vec![0.0; n];
    let bnorm = norm2(b);
    let mut report = PcgReport::default();
    if bnorm == 0.0 {
        report.converged = true;
        report.history.push(0.0);
        report.precond_history.push(0.0);
        return Ok((x, report));
    }
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    let mut q = vec![0.0; n];
    m.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let rz0 = rz.abs().sqrt();
    report.history.push(1.0);
    report.precond_history.push(1.0);

    for k in 1..=max_iter {
        a.spmv_into(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return Err(LinalgError::Indefinite {
                iteration: k,
                curvature: pq,
            });
        }
        let alpha = rz / pq;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &q, &mut r);
        report.iterations = k;
        let relres = norm2(&r) / bnorm;
        report.history.push(relres);
        m.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        report.precond_history.push(rz_new.abs().sqrt() / rz0);
        if relres <= tol {
            // Confirm with the true residual; restart from it if the
            // recurrence has drifted.
            a.spmv_into(&x, &mut q);
            for i in 0..n {
                r[i] = b[i] - q[i];
            }
            let true_relres = norm2(&r) / bnorm;
            if true_relres <= tol {
                report.converged = true;
                report.true_relres = true_relres;
                return Ok((x, report));
            }
            m.apply(&r, &mut z);
            rz = dot(&r, &z);
            p.copy_from_slice(&z);
            continue;
        }
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    a.spmv_into(&x, &mut q);
    for i in 0..n {
        r[i] = b[i] - q[i];
    }
    report.true_relres = norm2(&r) / bnorm;
    Ok((x, report))
}
