//! Preconditioned Krylov solvers for the rescaled saddle-point system:
//! MINRES with the block diagonal preconditioner and restarted GMRES with
//! the block lower-triangular one.

use std::cell::{Cell, RefCell};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::assembly::{build_saddle_system, AssemblyOptions, SaddleSystem};
use crate::error::{Error, LinalgError, Result};
use crate::mesh::SimplicialMesh;
use crate::output::sci;
use crate::problem::ManufacturedProblem;
use crate::sparse::{
    axpy, dot, ichol_threshold, norm2, pcg, CsrMatrix, DenseCholesky, IcholFactor, DENSE_GUARD,
};
use crate::wg::{PressureField, WGField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreconditionerKind {
    /// `P_d = diag(A, M_p)`.
    BlockDiag,
    /// `P_t = [A, 0; -B, -M_p]`.
    BlockLowerTri,
    None,
}

impl FromStr for PreconditionerKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "block_diag" => Ok(Self::BlockDiag),
            "block_lower_tri" => Ok(Self::BlockLowerTri),
            "none" => Ok(Self::None),
            other => Err(format!("unknown preconditioner `{other}`")),
        }
    }
}

impl fmt::Display for PreconditionerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::BlockDiag => "block_diag",
            Self::BlockLowerTri => "block_lower_tri",
            Self::None => "none",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Minres,
    Gmres,
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "minres" => Ok(Self::Minres),
            "gmres" => Ok(Self::Gmres),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Minres => "minres",
            Self::Gmres => "gmres",
        })
    }
}

impl Method {
    /// Preconditioner paired with the method by default.
    pub fn default_preconditioner(self) -> PreconditionerKind {
        match self {
            Method::Minres => PreconditionerKind::BlockDiag,
            Method::Gmres => PreconditionerKind::BlockLowerTri,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerSolveKind {
    /// Dense Cholesky up to `dense_limit` unknowns, PCG beyond.
    Auto,
    Dense,
    Pcg,
}

/// How `A^{-1}` is applied inside the block preconditioners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InnerSolveConfig {
    pub kind: InnerSolveKind,
    pub dense_limit: usize,
    pub droptol: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for InnerSolveConfig {
    fn default() -> Self {
        InnerSolveConfig {
            kind: InnerSolveKind::Auto,
            dense_limit: DENSE_GUARD,
            droptol: 1e-3,
            tol: 1e-10,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    pub preconditioner: PreconditionerKind,
    pub tol: f64,
    pub restart: usize,
    pub max_iter: usize,
    pub inner: InnerSolveConfig,
    /// Iterations over which a plateau is detected.
    pub stagnation_window: usize,
    /// Plateaus are only flagged while the residual exceeds this multiple of `tol`.
    pub stagnation_factor: f64,
}

impl SolverConfig {
    pub fn new(method: Method, tol: f64) -> Self {
        SolverConfig {
            method,
            preconditioner: method.default_preconditioner(),
            tol,
            restart: 30,
            max_iter: 1000,
            inner: InnerSolveConfig::default(),
            stagnation_window: 50,
            stagnation_factor: 100.0,
        }
    }

    /// Tolerance used for the examples: `1e-9` in 2D, `1e-8` in 3D.
    pub fn default_tol(dim: usize) -> f64 {
        if dim == 3 {
            1e-8
        } else {
            1e-9
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::Config(format!("tol must lie in (0, 1), got {}", self.tol)));
        }
        if self.restart == 0 || self.max_iter == 0 {
            return Err(Error::Config("restart and maxit must be positive".into()));
        }
        if self.method == Method::Minres && self.preconditioner == PreconditionerKind::BlockLowerTri {
            return Err(Error::Config(
                "MINRES needs a symmetric positive definite preconditioner; use block_diag or none".into(),
            ));
        }
        Ok(())
    }
}

/// `A^{-1}` by dense Cholesky or by IC-preconditioned CG.
pub enum InnerSolver<'a> {
    Dense(DenseCholesky),
    Pcg {
        a: &'a CsrMatrix,
        factor: IcholFactor,
        tol: f64,
        max_iter: usize,
    },
}

impl<'a> InnerSolver<'a> {
    pub fn new(a: &'a CsrMatrix, cfg: &InnerSolveConfig) -> Result<Self> {
        let dense = match cfg.kind {
            InnerSolveKind::Dense => true,
            InnerSolveKind::Pcg => false,
            InnerSolveKind::Auto => a.nrows() <= cfg.dense_limit.min(DENSE_GUARD),
        };
        if dense {
            Ok(InnerSolver::Dense(DenseCholesky::new(a)?))
        } else {
            let factor = ichol_threshold(a, cfg.droptol)?;
            if factor.shift > 0.0 {
                log::info!("incomplete Cholesky needed diagonal shift {:e}", factor.shift);
            }
            Ok(InnerSolver::Pcg {
                a,
                factor,
                tol: cfg.tol,
                max_iter: cfg.max_iter,
            })
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, InnerSolver::Dense(_))
    }

    /// Solves `A z = r`; returns the PCG iteration count (0 for dense).
    pub fn solve(&self, r: &[f64], z: &mut [f64]) -> Result<usize> {
        match self {
            InnerSolver::Dense(chol) => {
                chol.solve_into(r, z);
                Ok(0)
            }
            InnerSolver::Pcg {
                a,
                factor,
                tol,
                max_iter,
            } => {
                let (x, rep) = pcg(a, r, factor, *tol, *max_iter)?;
                if !rep.converged {
                    if !(rep.true_relres < 1e-6) {
                        return Err(LinalgError::InnerSolveFailed {
                            iterations: rep.iterations,
                            relres: rep.true_relres,
                        }
                        .into());
                    }
                    log::warn!(
                        "inner PCG stopped at relative residual {:e} after {} iterations",
                        rep.true_relres,
                        rep.iterations
                    );
                }
                z.copy_from_slice(&x);
                Ok(rep.iterations)
            }
        }
    }
}

/// Block preconditioner bound to one saddle system.
pub struct BlockPreconditioner<'a> {
    sys: &'a SaddleSystem,
    kind: PreconditionerKind,
    inner: Option<InnerSolver<'a>>,
    inner_iterations: Cell<usize>,
    applications: Cell<usize>,
    scratch: RefCell<Vec<f64>>,
}

impl<'a> BlockPreconditioner<'a> {
    pub fn new(sys: &'a SaddleSystem, kind: PreconditionerKind, inner: &InnerSolveConfig) -> Result<Self> {
        let inner = match kind {
            PreconditionerKind::None => None,
            _ => Some(InnerSolver::new(&sys.a, inner)?),
        };
        Ok(BlockPreconditioner {
            sys,
            kind,
            inner,
            inner_iterations: Cell::new(0),
            applications: Cell::new(0),
            scratch: RefCell::new(vec![0.0; sys.num_pressure()]),
        })
    }

    pub fn kind(&self) -> PreconditionerKind {
        self.kind
    }

    pub fn inner_iterations(&self) -> usize {
        self.inner_iterations.get()
    }

    pub fn applications(&self) -> usize {
        self.applications.get()
    }

    fn solve_a(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        let inner = self.inner.as_ref().expect("block preconditioner has an inner solver");
        let its = inner.solve(r, z)?;
        self.inner_iterations.set(self.inner_iterations.get() + its);
        Ok(())
    }

    /// `(A^{-1} r_u, M_p^{-1} r_p)`.
    pub fn apply_pd_inverse(&self, r: &[f64], out: &mut [f64]) -> Result<()> {
        let nu = self.sys.num_velocity();
        let (ru, rp) = r.split_at(nu);
        let (ou, op) = out.split_at_mut(nu);
        self.solve_a(ru, ou)?;
        for ((o, v), m) in op.iter_mut().zip(rp).zip(&self.sys.mp) {
            *o = v / m;
        }
        Ok(())
    }

    /// Forward substitution: `x_u = A^{-1} r_u`, `x_p = -M_p^{-1}(r_p + B x_u)`.
    pub fn apply_pt_inverse(&self, r: &[f64], out: &mut [f64]) -> Result<()> {
        let nu = self.sys.num_velocity();
        let (ru, rp) = r.split_at(nu);
        let (ou, op) = out.split_at_mut(nu);
        self.solve_a(ru, ou)?;
        let mut bx = self.scratch.borrow_mut();
        self.sys.b.spmv_into(ou, &mut bx);
        for (i, o) in op.iter_mut().enumerate() {
            *o = -(rp[i] + bx[i]) / self.sys.mp[i];
        }
        Ok(())
    }

    /// `P^{-1} r` for the configured kind.
    pub fn apply(&self, r: &[f64], out: &mut [f64]) -> Result<()> {
        self.applications.set(self.applications.get() + 1);
        match self.kind {
            PreconditionerKind::BlockDiag => self.apply_pd_inverse(r, out),
            PreconditionerKind::BlockLowerTri => self.apply_pt_inverse(r, out),
            PreconditionerKind::None => {
                out.copy_from_slice(r);
                Ok(())
            }
        }
    }

    /// `P x` (used by oracles).
    pub fn apply_forward(&self, x: &[f64], out: &mut [f64]) {
        let nu = self.sys.num_velocity();
        let (xu, xp) = x.split_at(nu);
        let (ou, op) = out.split_at_mut(nu);
        match self.kind {
            PreconditionerKind::None => out.copy_from_slice(x),
            PreconditionerKind::BlockDiag => {
                self.sys.a.spmv_into(xu, ou);
                for ((o, v), m) in op.iter_mut().zip(xp).zip(&self.sys.mp) {
                    *o = v * m;
                }
            }
            PreconditionerKind::BlockLowerTri => {
                self.sys.a.spmv_into(xu, ou);
                self.sys.b.spmv_into(xu, op);
                for ((o, v), m) in op.iter_mut().zip(xp).zip(&self.sys.mp) {
                    *o = -*o - v * m;
                }
            }
        }
    }
}

/// Iteration record of one Krylov solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub method: Method,
    pub preconditioner: PreconditionerKind,
    pub iterations: usize,
    pub converged: bool,
    /// Residual plateau detected before convergence.
    pub stagnated: bool,
    /// `||b - K x_k|| / ||b||` for k = 0..=iterations.
    pub history: Vec<f64>,
    /// Residual in the preconditioner norm (MINRES) or the Arnoldi estimate
    /// (GMRES), relative to step 0.
    pub precond_history: Vec<f64>,
    pub wall_time: f64,
    pub inner_iterations: usize,
    pub num_elements: usize,
    pub h: f64,
    pub mu: f64,
}

impl SolveReport {
    fn start(method: Method, precond: PreconditionerKind, mu: f64) -> Self {
        SolveReport {
            method,
            preconditioner: precond,
            iterations: 0,
            converged: false,
            stagnated: false,
            history: Vec::new(),
            precond_history: Vec::new(),
            wall_time: 0.0,
            inner_iterations: 0,
            num_elements: 0,
            h: f64::NAN,
            mu,
        }
    }

    pub fn final_relres(&self) -> f64 {
        self.history.last().copied().unwrap_or(f64::NAN)
    }

    /// `iteration,relres` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iteration,relres\n");
        for (i, r) in self.history.iter().enumerate() {
            s.push_str(&format!("{i},{}\n", sci(*r)));
        }
        s
    }

    pub fn summary_line(&self) -> String {
        format!(
            "method={} precond={} N={} h={} mu={} iters={} converged={}{}",
            self.method,
            self.preconditioner,
            self.num_elements,
            sci(self.h),
            sci(self.mu),
            self.iterations,
            self.converged,
            if self.stagnated { " stagnated=true" } else { "" }
        )
    }
}

struct Monitor<'c> {
    cfg: &'c SolverConfig,
}

impl Monitor<'_> {
    /// Plateau of the true residual over the configured window.
    fn stagnated(&self, history: &[f64]) -> bool {
        let w = self.cfg.stagnation_window;
        let k = history.len() - 1;
        if w == 0 || k < w {
            return false;
        }
        let now = history[k];
        now > self.cfg.stagnation_factor * self.cfg.tol && now > 0.99 * history[k - w]
    }
}

fn true_residual(sys: &SaddleSystem, b: &[f64], x: &[f64], work: &mut [f64]) -> f64 {
    sys.apply(x, work);
    let mut s = 0.0;
    for (bi, wi) in b.iter().zip(work.iter()) {
        s += (bi - wi) * (bi - wi);
    }
    s.sqrt()
}

/// Preconditioned MINRES from a zero initial guess. The preconditioner must
/// be symmetric positive definite.
pub fn minres(
    sys: &SaddleSystem,
    rhs: &[f64],
    precond: &BlockPreconditioner,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolveReport)> {
    if precond.kind() == PreconditionerKind::BlockLowerTri {
        return Err(Error::Config("MINRES cannot use the block lower-triangular preconditioner".into()));
    }
    let clock = Instant::now();
    let n = sys.size();
    let mut report = SolveReport::start(Method::Minres, precond.kind(), sys.mu);
    let mut x = vec![0.0; n];
    let bnorm = norm2(rhs);
    if bnorm == 0.0 {
        report.converged = true;
        report.history.push(0.0);
        report.precond_history.push(0.0);
        return Ok((x, report));
    }
    let monitor = Monitor { cfg };
    let mut work = vec![0.0; n];

    let mut v_old = vec![0.0; n];
    let mut v = rhs.to_vec();
    let mut z = vec![0.0; n];
    precond.apply(&v, &mut z)?;
    let mut gamma = dot(&z, &v);
    if !(gamma > 0.0) {
        return Err(LinalgError::NotSpd.into());
    }
    gamma = gamma.sqrt();
    let gamma0 = gamma;
    let mut gamma_old = 1.0;
    let mut eta = gamma;
    let (mut s_old, mut s) = (0.0, 0.0);
    let (mut c_old, mut c) = (1.0, 1.0);
    let mut w_old = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut az = vec![0.0; n];
    let mut z_new = vec![0.0; n];
    report.history.push(1.0);
    report.precond_history.push(1.0);

    for j in 1..=cfg.max_iter {
        for zi in z.iter_mut() {
            *zi /= gamma;
        }
        sys.apply(&z, &mut az);
        let delta = dot(&az, &z);
        // v_{j+1} = A z_j - (delta/gamma_j) v_j - (gamma_j/gamma_{j-1}) v_{j-1}
        let mut v_new = az.clone();
        axpy(-delta / gamma, &v, &mut v_new);
        axpy(-gamma / gamma_old, &v_old, &mut v_new);
        precond.apply(&v_new, &mut z_new)?;
        let gamma_new = dot(&z_new, &v_new).max(0.0).sqrt();

        let alpha0 = c * delta - c_old * s * gamma;
        let alpha1 = (alpha0 * alpha0 + gamma_new * gamma_new).sqrt();
        let alpha2 = s * delta + c_old * c * gamma;
        let alpha3 = s_old * gamma;
        let c_new = alpha0 / alpha1;
        let s_new = gamma_new / alpha1;
        let mut w_new = z.clone();
        axpy(-alpha3, &w_old, &mut w_new);
        axpy(-alpha2, &w, &mut w_new);
        for wi in w_new.iter_mut() {
            *wi /= alpha1;
        }
        axpy(c_new * eta, &w_new, &mut x);
        eta = -s_new * eta;

        report.iterations = j;
        let relres = true_residual(sys, rhs, &x, &mut work) / bnorm;
        report.history.push(relres);
        report.precond_history.push(eta.abs() / gamma0);
        if relres <= cfg.tol {
            report.converged = true;
            break;
        }
        if monitor.stagnated(&report.history) {
            report.stagnated = true;
            log::info!("MINRES residual stagnated at {relres:e} after {j} iterations");
            break;
        }
        if gamma_new == 0.0 || !alpha1.is_finite() || alpha1 == 0.0 {
            log::warn!("MINRES Lanczos breakdown at iteration {j}");
            break;
        }

        std::mem::swap(&mut v_old, &mut v);
        v = v_new;
        std::mem::swap(&mut z, &mut z_new);
        gamma_old = gamma;
        gamma = gamma_new;
        s_old = s;
        s = s_new;
        c_old = c;
        c = c_new;
        std::mem::swap(&mut w_old, &mut w);
        w = w_new;
    }
    report.inner_iterations = precond.inner_iterations();
    report.wall_time = clock.elapsed().as_secs_f64();
    Ok((x, report))
}

/// Right-preconditioned restarted GMRES from a zero initial guess. The
/// preconditioned directions are stored so the iterate is exact even when
/// the inner solve is inexact.
pub fn gmres_restart(
    sys: &SaddleSystem,
    rhs: &[f64],
    precond: &BlockPreconditioner,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolveReport)> {
    let clock = Instant::now();
    let n = sys.size();
    let m = cfg.restart;
    let mut report = SolveReport::start(Method::Gmres, precond.kind(), sys.mu);
    let mut x = vec![0.0; n];
    let bnorm = norm2(rhs);
    if bnorm == 0.0 {
        report.converged = true;
        report.history.push(0.0);
        report.precond_history.push(0.0);
        return Ok((x, report));
    }
    let monitor = Monitor { cfg };
    let mut work = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut r = rhs.to_vec();
    report.history.push(1.0);
    report.precond_history.push(1.0);
    let mut total = 0;

    'outer: while total < cfg.max_iter {
        let beta = norm2(&r);
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut zs: Vec<Vec<f64>> = Vec::with_capacity(m);
        // Hessenberg columns after rotation, stored column-wise.
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut cs: Vec<f64> = Vec::with_capacity(m);
        let mut sn: Vec<f64> = Vec::with_capacity(m);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut y = Vec::new();

        for j in 0..m {
            let mut zj = vec![0.0; n];
            precond.apply(&basis[j], &mut zj)?;
            let mut wv = vec![0.0; n];
            sys.apply(&zj, &mut wv);
            zs.push(zj);
            let mut col = vec![0.0; j + 2];
            for (i, vi) in basis.iter().enumerate() {
                let hij = dot(&wv, vi);
                col[i] = hij;
                axpy(-hij, vi, &mut wv);
            }
            // One reorthogonalization pass.
            for (i, vi) in basis.iter().enumerate() {
                let corr = dot(&wv, vi);
                col[i] += corr;
                axpy(-corr, vi, &mut wv);
            }
            let hnext = norm2(&wv);
            col[j + 1] = hnext;
            for i in 0..j {
                let t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            let rho = col[j].hypot(col[j + 1]);
            let (cj, sj) = if rho == 0.0 { (1.0, 0.0) } else { (col[j] / rho, col[j + 1] / rho) };
            col[j] = rho;
            col[j + 1] = 0.0;
            cs.push(cj);
            sn.push(sj);
            g[j + 1] = -sj * g[j];
            g[j] *= cj;
            h.push(col);

            y = back_substitute(&h, &g, j + 1);
            trial.copy_from_slice(&x);
            for (yi, zi) in y.iter().zip(&zs) {
                axpy(*yi, zi, &mut trial);
            }
            total += 1;
            report.iterations = total;
            let relres = true_residual(sys, rhs, &trial, &mut work) / bnorm;
            report.history.push(relres);
            report.precond_history.push(g[j + 1].abs() / bnorm);
            if relres <= cfg.tol {
                x.copy_from_slice(&trial);
                report.converged = true;
                break 'outer;
            }
            if monitor.stagnated(&report.history) {
                x.copy_from_slice(&trial);
                report.stagnated = true;
                log::info!("GMRES residual stagnated at {relres:e} after {total} iterations");
                break 'outer;
            }
            if total >= cfg.max_iter {
                break;
            }
            if hnext <= 1e-14 * beta {
                break;
            }
            basis.push(wv.iter().map(|v| v / hnext).collect());
        }
        for (yi, zi) in y.iter().zip(&zs) {
            axpy(*yi, zi, &mut x);
        }
        sys.apply(&x, &mut work);
        for i in 0..n {
            r[i] = rhs[i] - work[i];
        }
        if norm2(&r) == 0.0 {
            break;
        }
    }
    report.inner_iterations = precond.inner_iterations();
    report.wall_time = clock.elapsed().as_secs_f64();
    Ok((x, report))
}

fn back_substitute(h: &[Vec<f64>], g: &[f64], k: usize) -> Vec<f64> {
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for j in i + 1..k {
            s -= h[j][i] * y[j];
        }
        y[i] = if h[i][i] == 0.0 { 0.0 } else { s / h[i][i] };
    }
    y
}

/// Solves the rescaled system with the configured method; returns the
/// rescaled solution vector `(mu u, p)`.
pub fn solve_system(sys: &SaddleSystem, cfg: &SolverConfig) -> Result<(Vec<f64>, SolveReport)> {
    cfg.validate()?;
    let precond = BlockPreconditioner::new(sys, cfg.preconditioner, &cfg.inner)?;
    let rhs = sys.rhs();
    let (x, mut report) = match cfg.method {
        Method::Minres => minres(sys, &rhs, &precond, cfg)?,
        Method::Gmres => gmres_restart(sys, &rhs, &precond, cfg)?,
    };
    report.num_elements = sys.num_pressure();
    Ok((x, report))
}

/// Discrete solution in physical units.
#[derive(Debug, Clone)]
pub struct StokesSolution {
    pub velocity: WGField,
    pub pressure: PressureField,
    pub report: SolveReport,
    pub alpha_h: f64,
}

impl StokesSolution {
    pub fn from_system(mesh: &SimplicialMesh, sys: &SaddleSystem, x: &[f64], mut report: SolveReport) -> Self {
        report.num_elements = mesh.num_elements();
        report.h = mesh.stats().h;
        StokesSolution {
            velocity: sys.velocity_field(mesh, x),
            pressure: sys.pressure_field(mesh, x),
            report,
            alpha_h: sys.alpha_h,
        }
    }
}

/// Assemble (with consistency enforcement unless disabled), solve, unscale.
pub fn solve_stokes(
    mesh: &SimplicialMesh,
    problem: &ManufacturedProblem,
    assembly: &AssemblyOptions,
    cfg: &SolverConfig,
    consistent: bool,
) -> Result<StokesSolution> {
    let sys = build_saddle_system(mesh, problem, assembly, consistent)?;
    let (x, report) = solve_system(&sys, cfg)?;
    Ok(StokesSolution::from_system(mesh, &sys, &x, report))
}
