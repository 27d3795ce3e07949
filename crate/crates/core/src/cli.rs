//! Command-line experiment runner.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::assembly::build_saddle_system;
use crate::config::{ExperimentConfig, LabelledMesh};
use crate::error::{Error, Result};
use crate::krylov::{solve_system, Method, PreconditionerKind, SolveReport};
use crate::output::{markdown_table, sci};
use crate::sparse::{write_matrix_market, write_vector_market, DENSE_GUARD};
use crate::verification::{
    convergence_study, full_markdown, inconsistency_demo, spectral_report, velocity_markdown,
    ConvergenceTable,
};
use crate::wg::BoundaryProjection;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_CONVERGED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "wgstokes", version, about = "Weak Galerkin Stokes solver and verification harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Error table and convergence rates over mesh levels.
    Convergence(CommonArgs),
    /// Krylov iteration counts over viscosities and mesh levels.
    SolverStudy(CommonArgs),
    /// Dense eigenvalue checks of the Schur complement and preconditioned operator.
    Spectral(CommonArgs),
    /// Residual histories with and without the boundary-flux correction.
    Inconsistency(CommonArgs),
    /// Write A, B and the right-hand side in Matrix Market format.
    ExportSystem(CommonArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// stokes2d_exp, stokes3d_trig or custom (needs --config).
    #[arg(long)]
    pub problem: Option<String>,
    /// Comma-separated viscosities.
    #[arg(long, value_delimiter = ',')]
    pub mu: Option<Vec<f64>>,
    /// Comma-separated structured mesh levels.
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<usize>>,
    /// Mesh files (native or .msh) used instead of levels.
    #[arg(long = "mesh", value_delimiter = ',')]
    pub meshes: Option<Vec<PathBuf>>,
    #[arg(long)]
    pub method: Option<Method>,
    /// block_diag, block_lower_tri or none.
    #[arg(long)]
    pub precond: Option<PreconditionerKind>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub restart: Option<usize>,
    #[arg(long)]
    pub maxit: Option<usize>,
    /// Boundary projection: barycenter, gauss2 or gauss3.
    #[arg(long)]
    pub qg: Option<BoundaryProjection>,
    /// Keep the raw boundary flux (no consistency correction).
    #[arg(long)]
    pub inconsistent: bool,
}

impl CommonArgs {
    /// Config file (or defaults) with command-line overrides applied.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = &self.problem {
            c.problem = v.clone();
        }
        if let Some(v) = &self.mu {
            c.mu = v.clone();
        }
        if let Some(v) = &self.levels {
            c.levels = Some(v.clone());
        }
        if let Some(v) = &self.meshes {
            c.mesh_files = v.clone();
        }
        if let Some(v) = self.method {
            c.method = v;
        }
        if let Some(v) = self.precond {
            c.precond = Some(v);
        }
        if let Some(v) = self.tol {
            c.tol = Some(v);
        }
        if let Some(v) = self.restart {
            c.restart = v;
        }
        if let Some(v) = self.maxit {
            c.maxit = v;
        }
        if let Some(v) = self.qg {
            c.qg = v;
        }
        if let Some(v) = &self.out {
            c.out = v.clone();
        }
        if self.inconsistent {
            c.consistent = false;
        }
        c.validate()?;
        Ok(c)
    }
}

/// Outcome of a subcommand: files written and whether every solve converged.
#[derive(Debug, Clone, Default)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub all_converged: bool,
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Writer {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.files.push(path);
        Ok(())
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let path = self.dir.join(name);
        self.files.push(path.clone());
        path
    }
}

fn mu_label(mu: f64) -> String {
    format!("{mu:e}")
}

pub fn run_convergence(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let meshes: Vec<_> = cfg.meshes()?.into_iter().map(|m| m.mesh).collect();
    let solver = cfg.solver()?;
    let assembly = cfg.assembly();
    let mut tables: Vec<ConvergenceTable> = Vec::new();
    for &mu in &cfg.mu {
        let problem = cfg.problem(mu)?;
        tables.push(convergence_study(&problem, &meshes, &assembly, &solver)?);
    }
    let mut w = Writer::new(&cfg.out)?;
    let mut md = String::from("## Velocity error\n\n");
    md.push_str(&velocity_markdown(&tables));
    for t in &tables {
        w.write(&format!("convergence_mu{}.csv", mu_label(t.mu)), &t.to_csv())?;
        md.push_str(&format!("\n## All errors, μ = {}\n\n", t.mu));
        md.push_str(&full_markdown(t));
    }
    w.write("convergence.md", &md)?;
    Ok(RunOutcome {
        files: w.files,
        all_converged: tables.iter().all(|t| t.all_converged()),
    })
}

pub fn run_solver_study(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let meshes = cfg.meshes()?;
    let solver = cfg.solver()?;
    let assembly = cfg.assembly();
    let mut reports: Vec<Vec<SolveReport>> = Vec::new();
    for &mu in &cfg.mu {
        let problem = cfg.problem(mu)?;
        let mut row = Vec::new();
        for m in &meshes {
            let sys = build_saddle_system(&m.mesh, &problem, &assembly, cfg.consistent)?;
            let (_, mut r) = solve_system(&sys, &solver)?;
            r.h = m.mesh.stats().h;
            log::info!("{}", r.summary_line());
            row.push(r);
        }
        reports.push(row);
    }
    let mut csv = String::from("mu,mesh,N,h,method,precond,iterations,converged,stagnated,final_relres,inner_iterations\n");
    for (mu, row) in cfg.mu.iter().zip(&reports) {
        for (m, r) in meshes.iter().zip(row) {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                sci(*mu),
                m.label,
                r.num_elements,
                sci(r.h),
                r.method,
                r.preconditioner,
                r.iterations,
                r.converged,
                r.stagnated,
                sci(r.final_relres()),
                r.inner_iterations
            ));
        }
    }
    let mut header = vec!["μ \\ N".to_string()];
    header.extend(meshes.iter().map(|m| m.mesh.num_elements().to_string()));
    let rows: Vec<Vec<String>> = cfg
        .mu
        .iter()
        .zip(&reports)
        .map(|(mu, row)| {
            let mut cells = vec![mu.to_string()];
            cells.extend(row.iter().map(|r| {
                if r.converged {
                    r.iterations.to_string()
                } else {
                    format!("{}*", r.iterations)
                }
            }));
            cells
        })
        .collect();
    let method = cfg.method;
    let precond = cfg.precond.unwrap_or(method.default_preconditioner());
    let md = format!(
        "## Number of {} iterations ({}, tol = {:e})\n\n{}\n`*` did not converge.\n",
        method.to_string().to_uppercase(),
        precond,
        cfg.tol()?,
        markdown_table(&header, &rows)
    );
    let mut w = Writer::new(&cfg.out)?;
    w.write("iterations.csv", &csv)?;
    w.write("iterations.md", &md)?;
    for (mu, row) in cfg.mu.iter().zip(&reports) {
        for (m, r) in meshes.iter().zip(row) {
            w.write(&format!("history_mu{}_{}.csv", mu_label(*mu), m.label), &r.to_csv())?;
        }
    }
    Ok(RunOutcome {
        files: w.files,
        all_converged: reports.iter().flatten().all(|r| r.converged),
    })
}

fn check_dense_guard(meshes: &[LabelledMesh], cfg: &ExperimentConfig) -> Result<()> {
    let problem = cfg.problem(cfg.mu[0])?;
    for m in meshes {
        let dofs = crate::assembly::DofMap::new(&m.mesh);
        if dofs.total() > DENSE_GUARD {
            return Err(Error::Config(format!(
                "mesh {} has {} unknowns; dense spectral checks are limited to {DENSE_GUARD}",
                m.label,
                dofs.total()
            )));
        }
        if problem.dim != m.mesh.dim() {
            return Err(Error::Config("problem and mesh dimensions differ".into()));
        }
    }
    Ok(())
}

pub fn run_spectral(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let meshes = cfg.meshes()?;
    check_dense_guard(&meshes, cfg)?;
    let problem = cfg.problem(cfg.mu[0])?;
    let mut w = Writer::new(&cfg.out)?;
    let mut csv = String::from(
        "mesh,N,n_u,beta,gamma_min,gamma_max,zero_gammas,zero_lambdas,unit_lambdas,expected_unit_lambdas,interval_violations,violations_excluding_unit,quadratic_map_mismatch\n",
    );
    let mut rows = Vec::new();
    for m in &meshes {
        let sys = build_saddle_system(&m.mesh, &problem, &cfg.assembly(), true)?;
        let s = spectral_report(&sys)?;
        w.write(&format!("gammas_{}.csv", m.label), &s.gammas_csv())?;
        w.write(&format!("lambdas_{}.csv", m.label), &s.lambdas_csv())?;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            m.label,
            s.num_pressure,
            s.num_velocity,
            sci(s.beta),
            sci(s.gammas[0]),
            sci(*s.gammas.last().unwrap_or(&0.0)),
            s.zero_gammas,
            s.zero_lambdas,
            s.unit_lambdas,
            s.expected_unit_multiplicity(),
            s.interval_violations.len(),
            s.violations_excluding_unit().len(),
            sci(s.quadratic_map_mismatch)
        ));
        rows.push(vec![
            s.num_pressure.to_string(),
            format!("{:.4}", s.beta),
            s.zero_gammas.to_string(),
            format!("{:.6}", s.gammas.last().unwrap_or(&0.0)),
            s.unit_lambdas.to_string(),
            s.interval_violations.len().to_string(),
            s.violations_excluding_unit().len().to_string(),
        ]);
    }
    let header: Vec<String> = ["N", "β", "zero γ", "max γ", "λ = 1", "outside intervals", "outside (λ = 1 admitted)"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    w.write("spectral.csv", &csv)?;
    w.write("spectral.md", &markdown_table(&header, &rows))?;
    Ok(RunOutcome {
        files: w.files,
        all_converged: true,
    })
}

pub fn run_inconsistency(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let meshes = cfg.meshes()?;
    let solver = cfg.solver()?;
    let problem = cfg.problem(cfg.mu[0])?;
    let mut w = Writer::new(&cfg.out)?;
    let mut csv = String::from(
        "mesh,N,alpha_h,consistent_iterations,consistent_converged,consistent_final_relres,raw_iterations,raw_converged,raw_stagnated,raw_final_relres\n",
    );
    let mut ok = true;
    for m in &meshes {
        let demo = inconsistency_demo(&m.mesh, &problem, &cfg.assembly(), &solver)?;
        let _ = writeln!(std::io::stdout(), "{}: alpha_h = {}", m.label, sci(demo.alpha_h));
        ok &= demo.consistent.converged;
        w.write(&format!("history_consistent_{}.csv", m.label), &demo.consistent.to_csv())?;
        w.write(&format!("history_raw_{}.csv", m.label), &demo.raw.to_csv())?;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            m.label,
            m.mesh.num_elements(),
            sci(demo.alpha_h),
            demo.consistent.iterations,
            demo.consistent.converged,
            sci(demo.consistent.final_relres()),
            demo.raw.iterations,
            demo.raw.converged,
            demo.raw.stagnated,
            sci(demo.raw.final_relres())
        ));
    }
    w.write("inconsistency.csv", &csv)?;
    Ok(RunOutcome {
        files: w.files,
        all_converged: ok,
    })
}

pub fn run_export(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let meshes = cfg.meshes()?;
    let mut w = Writer::new(&cfg.out)?;
    for &mu in &cfg.mu {
        let problem = cfg.problem(mu)?;
        for m in &meshes {
            let sys = build_saddle_system(&m.mesh, &problem, &cfg.assembly(), cfg.consistent)?;
            let stem = format!("{}_mu{}", m.label, mu_label(mu));
            write_matrix_market(&sys.a, &w.path(&format!("A_{stem}.mtx")))?;
            write_matrix_market(&sys.b, &w.path(&format!("B_{stem}.mtx")))?;
            write_matrix_market(&sys.operator(), &w.path(&format!("K_{stem}.mtx")))?;
            write_vector_market(&sys.rhs(), &w.path(&format!("rhs_{stem}.mtx")))?;
            write_vector_market(&sys.mp, &w.path(&format!("Mp_{stem}.mtx")))?;
        }
    }
    Ok(RunOutcome {
        files: w.files,
        all_converged: true,
    })
}

pub fn run_command(command: &Command) -> Result<RunOutcome> {
    match command {
        Command::Convergence(a) => run_convergence(&a.resolve()?),
        Command::SolverStudy(a) => run_solver_study(&a.resolve()?),
        Command::Spectral(a) => run_spectral(&a.resolve()?),
        Command::Inconsistency(a) => run_inconsistency(&a.resolve()?),
        Command::ExportSystem(a) => run_export(&a.resolve()?),
    }
}

/// Exit code for a finished run.
pub fn exit_code(result: &Result<RunOutcome>) -> i32 {
    match result {
        Ok(o) if o.all_converged => EXIT_OK,
        Ok(_) => EXIT_NOT_CONVERGED,
        Err(Error::Linalg(_)) => EXIT_NOT_CONVERGED,
        Err(_) => EXIT_CONFIG,
    }
}
