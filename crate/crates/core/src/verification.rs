//! Discretization errors, convergence tables, spectral checks of the
//! preconditioned operator and Krylov residual bounds.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::assembly::{build_saddle_system, AssemblyOptions, SaddleSystem};
use crate::error::{Error, LinalgError, Result};
use crate::geom::{self, Point};
use crate::krylov::{solve_system, SolveReport, SolverConfig, StokesSolution};
use crate::mesh::SimplicialMesh;
use crate::output::{markdown_table, sci};
use crate::problem::ManufacturedProblem;
use crate::quadrature::SimplexRule;
use crate::sparse::{dense_eig_sym, dense_geig_sym, DENSE_GUARD};
use crate::wg;

/// Degree integrated exactly by the error quadrature.
pub const ERROR_DEGREE: usize = 4;

const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    /// `||u - u_h^o||`
    pub l2_velocity: f64,
    /// `||Q_h^o u - u_h^o||`
    pub superconv: f64,
    /// Broken `||grad u - grad_w u_h||`.
    pub grad_error: f64,
    /// `||p - p_h||` with both pressures at zero mean.
    pub pressure_error: f64,
    pub h: f64,
    pub num_elements: usize,
    pub mu: f64,
    pub alpha_h: f64,
}

fn gradient_fd(u: &dyn Fn(&Point) -> geom::Vector, x: &Point, dim: usize) -> [[f64; 3]; 3] {
    let mut g = [[0.0; 3]; 3];
    for axis in 0..dim {
        let (mut xp, mut xm) = (*x, *x);
        xp[axis] += FD_STEP;
        xm[axis] -= FD_STEP;
        let (up, um) = (u(&xp), u(&xm));
        for r in 0..dim {
            g[r][axis] = (up[r] - um[r]) / (2.0 * FD_STEP);
        }
    }
    g
}

pub fn compute_errors(
    mesh: &SimplicialMesh,
    problem: &ManufacturedProblem,
    solution: &StokesSolution,
) -> Result<ErrorReport> {
    let (u, p) = match (&problem.velocity, &problem.pressure) {
        (Some(u), Some(p)) => (u, p),
        _ => {
            return Err(Error::Problem(
                "error computation needs the exact velocity and pressure".into(),
            ))
        }
    };
    let d = mesh.dim();
    let rule = SimplexRule::with_degree(d, ERROR_DEGREE);
    let fine = SimplexRule::with_degree(d, 2 * ERROR_DEGREE);
    let p_mean = {
        let total: f64 = mesh
            .geometries()
            .iter()
            .map(|g| g.measure * fine.mean(&g.vertices, |x| p(x)))
            .sum();
        total / mesh.total_measure()
    };
    let ph_mean = solution.pressure.mean(mesh);
    let (mut l2, mut sup, mut grad, mut pres) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..mesh.num_elements() {
        let g = mesh.geometry(k);
        let uh = solution.velocity.interior[k];
        let rows = wg::weak_gradient_field(g, &uh, &solution.velocity.local_facets(mesh, k));
        let ph = solution.pressure.values[k] - ph_mean;
        for (x, w) in rule.map(&g.vertices) {
            let wk = w * g.measure;
            let ux = u(&x);
            l2 += wk * (0..d).map(|r| (ux[r] - uh[r]).powi(2)).sum::<f64>();
            let gu = gradient_fd(&**u, &x, d);
            for (r, row) in rows.iter().enumerate().take(d) {
                let gw = row.eval(g, &x);
                grad += wk * (0..d).map(|c| (gu[r][c] - gw[c]).powi(2)).sum::<f64>();
            }
            pres += wk * (p(&x) - p_mean - ph).powi(2);
        }
        let qu = wg::project_interior(&**u, g, 2 * ERROR_DEGREE);
        sup += g.measure * (0..d).map(|r| (qu[r] - uh[r]).powi(2)).sum::<f64>();
    }
    Ok(ErrorReport {
        l2_velocity: l2.sqrt(),
        superconv: sup.sqrt(),
        grad_error: grad.sqrt(),
        pressure_error: pres.sqrt(),
        h: mesh.stats().h,
        num_elements: mesh.num_elements(),
        mu: problem.mu,
        alpha_h: solution.alpha_h,
    })
}

/// `log(e1/e2) / log(h1/h2)`.
pub fn rate(e1: f64, e2: f64, h1: f64, h2: f64) -> f64 {
    (e1 / e2).ln() / (h1 / h2).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub errors: ErrorReport,
    pub iterations: usize,
    pub converged: bool,
    pub rate_l2: Option<f64>,
    pub rate_superconv: Option<f64>,
    pub rate_grad: Option<f64>,
    pub rate_pressure: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub mu: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn from_reports(mu: f64, reports: Vec<(ErrorReport, usize, bool)>) -> Self {
        let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(reports.len());
        for (errors, iterations, converged) in reports {
            let prev = rows.last().map(|r| &r.errors);
            let r = |f: fn(&ErrorReport) -> f64| prev.map(|p| rate(f(p), f(&errors), p.h, errors.h));
            rows.push(ConvergenceRow {
                rate_l2: r(|e| e.l2_velocity),
                rate_superconv: r(|e| e.superconv),
                rate_grad: r(|e| e.grad_error),
                rate_pressure: r(|e| e.pressure_error),
                errors,
                iterations,
                converged,
            });
        }
        ConvergenceTable { mu, rows }
    }

    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "N,h,mu,l2_velocity,rate_l2,superconv,rate_superconv,grad_error,rate_grad,pressure_error,rate_pressure,alpha_h,iterations,converged\n",
        );
        let opt = |r: Option<f64>| r.map(sci).unwrap_or_default();
        for row in &self.rows {
            let e = &row.errors;
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                e.num_elements,
                sci(e.h),
                sci(e.mu),
                sci(e.l2_velocity),
                opt(row.rate_l2),
                sci(e.superconv),
                opt(row.rate_superconv),
                sci(e.grad_error),
                opt(row.rate_grad),
                sci(e.pressure_error),
                opt(row.rate_pressure),
                sci(e.alpha_h),
                row.iterations,
                row.converged
            ));
        }
        s
    }
}

/// Velocity error table with one "error | conv. rate" column pair per
/// viscosity; tables must share their meshes.
pub fn velocity_markdown(tables: &[ConvergenceTable]) -> String {
    let mut header = vec!["N".to_string()];
    for t in tables {
        header.push(format!("‖u − u_h‖ (μ = {})", t.mu));
        header.push("conv. rate".to_string());
    }
    let nrows = tables.first().map_or(0, |t| t.rows.len());
    let rows: Vec<Vec<String>> = (0..nrows)
        .map(|i| {
            let mut cells = vec![tables[0].rows[i].errors.num_elements.to_string()];
            for t in tables {
                let row = &t.rows[i];
                cells.push(format!("{:.4e}", row.errors.l2_velocity));
                cells.push(row.rate_l2.map(|r| format!("{r:.3}")).unwrap_or_else(|| "-".into()));
            }
            cells
        })
        .collect();
    markdown_table(&header, &rows)
}

/// All error columns of one table.
pub fn full_markdown(table: &ConvergenceTable) -> String {
    let header: Vec<String> = [
        "N",
        "‖u − u_h‖",
        "conv. rate",
        "‖Q_h u − u_h‖",
        "conv. rate",
        "‖∇u − ∇_w u_h‖",
        "conv. rate",
        "‖p − p_h‖",
        "conv. rate",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let fmt_rate = |r: Option<f64>| r.map(|r| format!("{r:.3}")).unwrap_or_else(|| "-".into());
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|row| {
            let e = &row.errors;
            vec![
                e.num_elements.to_string(),
                format!("{:.4e}", e.l2_velocity),
                fmt_rate(row.rate_l2),
                format!("{:.4e}", e.superconv),
                fmt_rate(row.rate_superconv),
                format!("{:.4e}", e.grad_error),
                fmt_rate(row.rate_grad),
                format!("{:.4e}", e.pressure_error),
                fmt_rate(row.rate_pressure),
            ]
        })
        .collect();
    markdown_table(&header, &rows)
}

/// Solves on every mesh (concurrently) and tabulates errors in mesh order.
pub fn convergence_study(
    problem: &ManufacturedProblem,
    meshes: &[SimplicialMesh],
    assembly: &AssemblyOptions,
    cfg: &SolverConfig,
) -> Result<ConvergenceTable> {
    if meshes.len() < 2 {
        return Err(Error::Config("a convergence study needs at least two meshes".into()));
    }
    let reports: Vec<Result<(ErrorReport, usize, bool)>> = meshes
        .par_iter()
        .map(|mesh| {
            let sys = build_saddle_system(mesh, problem, assembly, true)?;
            let (x, report) = solve_system(&sys, cfg)?;
            if !report.converged {
                log::warn!("solve on N = {} did not converge", mesh.num_elements());
            }
            let sol = StokesSolution::from_system(mesh, &sys, &x, report);
            let e = compute_errors(mesh, problem, &sol)?;
            Ok((e, sol.report.iterations, sol.report.converged))
        })
        .collect();
    Ok(ConvergenceTable::from_reports(
        problem.mu,
        reports.into_iter().collect::<Result<_>>()?,
    ))
}

/// Dense spectral data of one saddle system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub d: usize,
    pub num_velocity: usize,
    pub num_pressure: usize,
    /// Generalized eigenvalues of `S q = gamma M_p q`, `S = B A^{-1} B^T`.
    pub gammas: Vec<f64>,
    /// `sqrt(gamma_2)`.
    pub beta: f64,
    /// Eigenvalues of the `P_d`-preconditioned saddle operator.
    pub lambdas: Vec<f64>,
    pub lambda_min_a: f64,
    pub lambda_max_mp: f64,
    /// Number of `gamma` within `1e-10` of zero.
    pub zero_gammas: usize,
    /// Largest `gamma` minus `d`.
    pub gamma_excess: f64,
    /// Eigenvalues within `1e-8` of zero.
    pub zero_lambdas: usize,
    /// Eigenvalues within `1e-8` of one.
    pub unit_lambdas: usize,
    /// Eigenvalues outside the three-interval bound (zero allowed).
    pub interval_violations: Vec<f64>,
    /// Largest distance of an eigenvalue to the image of the `gamma` set
    /// under `(1 +- sqrt(1 + 4 gamma)) / 2`.
    pub quadratic_map_mismatch: f64,
}

pub const SPECTRAL_MARGIN: f64 = 1e-8;

/// The three intervals bounding the preconditioned eigenvalues, plus zero.
pub fn eigenvalue_intervals(d: f64, beta: f64) -> [(f64, f64); 3] {
    let lo = |g: f64| (1.0 - (1.0 + 4.0 * g).sqrt()) / 2.0;
    let hi = |g: f64| (1.0 + (1.0 + 4.0 * g).sqrt()) / 2.0;
    [(lo(d), lo(beta * beta)), (0.0, 0.0), (hi(beta * beta), hi(d))]
}

pub fn in_intervals(lambda: f64, intervals: &[(f64, f64)], margin: f64) -> bool {
    intervals
        .iter()
        .any(|&(a, b)| lambda >= a - margin && lambda <= b + margin)
}

pub fn spectral_report(sys: &SaddleSystem) -> Result<SpectralReport> {
    let nu = sys.num_velocity();
    let np = sys.num_pressure();
    if nu + np > DENSE_GUARD {
        return Err(LinalgError::TooLarge {
            size: nu + np,
            limit: DENSE_GUARD,
        }
        .into());
    }
    let d = sys.dofs.dim();
    let a = sys.a.to_dense();
    let b = sys.b.to_dense();
    let chol = a.clone().cholesky().ok_or(LinalgError::NotSpd)?;
    let l = chol.l();
    // L^{-1} B^T
    let lbt = l
        .solve_lower_triangular(&b.transpose())
        .ok_or(LinalgError::NotSpd)?;
    let s = lbt.transpose() * &lbt;
    let mp = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&sys.mp));
    let gammas = dense_geig_sym(&s, &mp)?;
    let beta = gammas.get(1).copied().unwrap_or(0.0).max(0.0).sqrt();

    // diag(L, M_p^{1/2})^{-1} K diag(L, M_p^{1/2})^{-T}
    let mut t = DMatrix::<f64>::identity(nu + np, nu + np);
    for i in nu..nu + np {
        t[(i, i)] = 0.0;
    }
    for k in 0..np {
        let scale = 1.0 / sys.mp[k].sqrt();
        for j in 0..nu {
            let v = -lbt[(j, k)] * scale;
            t[(j, nu + k)] = v;
            t[(nu + k, j)] = v;
        }
    }
    let lambdas = dense_eig_sym(&t)?;
    let lambda_min_a = dense_eig_sym(&a)?[0];
    let lambda_max_mp = sys.mp.iter().copied().fold(0.0, f64::max);

    let intervals = eigenvalue_intervals(d as f64, beta);
    let interval_violations: Vec<f64> = lambdas
        .iter()
        .copied()
        .filter(|&l| !in_intervals(l, &intervals, SPECTRAL_MARGIN))
        .collect();
    let images: Vec<f64> = gammas
        .iter()
        .flat_map(|&g| {
            let r = (1.0 + 4.0 * g.max(0.0)).sqrt();
            [(1.0 - r) / 2.0, (1.0 + r) / 2.0]
        })
        .collect();
    let quadratic_map_mismatch = lambdas
        .iter()
        .map(|l| images.iter().map(|m| (l - m).abs()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    Ok(SpectralReport {
        d,
        num_velocity: nu,
        num_pressure: np,
        zero_gammas: gammas.iter().filter(|g| g.abs() < 1e-10).count(),
        gamma_excess: gammas.last().copied().unwrap_or(0.0) - d as f64,
        zero_lambdas: lambdas.iter().filter(|l| l.abs() < SPECTRAL_MARGIN).count(),
        unit_lambdas: lambdas.iter().filter(|l| (*l - 1.0).abs() < SPECTRAL_MARGIN).count(),
        interval_violations,
        quadratic_map_mismatch,
        gammas,
        beta,
        lambdas,
        lambda_min_a,
        lambda_max_mp,
    })
}

impl SpectralReport {
    /// Eigenvalue one is forced by velocities with zero discrete divergence;
    /// its multiplicity is `n_u - rank(B) = n_u - N + 1` on connected meshes.
    pub fn expected_unit_multiplicity(&self) -> usize {
        self.num_velocity + 1 - self.num_pressure
    }

    /// Violations of the three-interval bound once eigenvalue one is admitted.
    pub fn violations_excluding_unit(&self) -> Vec<f64> {
        self.interval_violations
            .iter()
            .copied()
            .filter(|l| (l - 1.0).abs() >= SPECTRAL_MARGIN)
            .collect()
    }

    pub fn gammas_csv(&self) -> String {
        let mut s = String::from("index,gamma\n");
        for (i, g) in self.gammas.iter().enumerate() {
            s.push_str(&format!("{i},{}\n", sci(*g)));
        }
        s
    }

    pub fn lambdas_csv(&self) -> String {
        let intervals = eigenvalue_intervals(self.d as f64, self.beta);
        let mut s = String::from("index,lambda,in_intervals\n");
        for (i, l) in self.lambdas.iter().enumerate() {
            s.push_str(&format!(
                "{i},{},{}\n",
                sci(*l),
                in_intervals(*l, &intervals, SPECTRAL_MARGIN)
            ));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Minres,
    Gmres,
}

/// Which residual history is compared against the bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualNorm {
    True,
    Preconditioned,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub passed: bool,
    /// Smallest `bound - residual` over the checked iterations.
    pub worst_margin: f64,
    pub worst_iteration: usize,
    pub checked: usize,
}

/// `(sqrt(d) - beta) / (sqrt(d) + beta)`.
pub fn contraction_factor(d: usize, beta: f64) -> f64 {
    let sd = (d as f64).sqrt();
    (sd - beta) / (sd + beta)
}

/// Bound on the relative residual at iteration `k`.
pub fn residual_bound(kind: BoundKind, spectral: &SpectralReport, k: usize) -> Option<f64> {
    let q = contraction_factor(spectral.d, spectral.beta);
    let d = spectral.d as f64;
    match kind {
        BoundKind::Minres => (k % 2 == 1).then(|| 2.0 * q.powi(((k - 1) / 2) as i32)),
        BoundKind::Gmres => (k >= 2).then(|| {
            let c = 1.0 + d + (d * spectral.lambda_max_mp / spectral.lambda_min_a).sqrt();
            2.0 * c * q.powi((k - 2) as i32)
        }),
    }
}

pub fn residual_bound_check(
    report: &SolveReport,
    spectral: &SpectralReport,
    kind: BoundKind,
    norm: ResidualNorm,
) -> BoundCheck {
    let history = match norm {
        ResidualNorm::True => &report.history,
        ResidualNorm::Preconditioned => &report.precond_history,
    };
    let mut out = BoundCheck {
        passed: true,
        worst_margin: f64::INFINITY,
        worst_iteration: 0,
        checked: 0,
    };
    for (k, &r) in history.iter().enumerate() {
        if let Some(bound) = residual_bound(kind, spectral, k) {
            out.checked += 1;
            let margin = bound - r;
            if margin < out.worst_margin {
                out.worst_margin = margin;
                out.worst_iteration = k;
            }
        }
    }
    out.passed = out.worst_margin >= 0.0;
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InconsistencyDemo {
    pub alpha_h: f64,
    pub consistent: SolveReport,
    pub raw: SolveReport,
}

/// Solves once with the mean-corrected and once with the raw boundary flux.
pub fn inconsistency_demo(
    mesh: &SimplicialMesh,
    problem: &ManufacturedProblem,
    assembly: &AssemblyOptions,
    cfg: &SolverConfig,
) -> Result<InconsistencyDemo> {
    let mut sys = build_saddle_system(mesh, problem, assembly, true)?;
    let h = mesh.stats().h;
    let (_, mut consistent) = solve_system(&sys, cfg)?;
    sys.consistent = false;
    let (_, mut raw) = solve_system(&sys, cfg)?;
    consistent.h = h;
    raw.h = h;
    Ok(InconsistencyDemo {
        alpha_h: sys.alpha_h,
        consistent,
        raw,
    })
}
