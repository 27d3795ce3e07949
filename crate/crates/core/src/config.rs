//! Experiment configuration (JSON) with defaults matching the reference
//! experiments.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assembly::{AssemblyOptions, DEFAULT_LOAD_DEGREE};
use crate::error::{Error, Result};
use crate::krylov::{InnerSolveConfig, Method, PreconditionerKind, SolverConfig};
use crate::mesh::{MeshFormat, SimplicialMesh};
use crate::problem::{custom_problem, stokes2d_exp, stokes3d_trig, CustomProblemSpec, ManufacturedProblem};
use crate::wg::BoundaryProjection;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `stokes2d_exp`, `stokes3d_trig` or `custom`.
    pub problem: String,
    pub custom: Option<CustomProblemSpec>,
    pub mu: Vec<f64>,
    /// Structured mesh levels (subdivisions per side); ignored when
    /// `mesh_files` is non-empty. Defaults depend on the dimension.
    pub levels: Option<Vec<usize>>,
    pub mesh_files: Vec<PathBuf>,
    pub qg: BoundaryProjection,
    pub method: Method,
    /// Defaults to the method's natural pairing.
    pub precond: Option<PreconditionerKind>,
    /// Defaults to 1e-9 in 2D and 1e-8 in 3D.
    pub tol: Option<f64>,
    pub restart: usize,
    pub maxit: usize,
    pub out: PathBuf,
    /// Remove the mean of the boundary flux before solving.
    pub consistent: bool,
    pub load_degree: usize,
    pub inner: InnerSolveConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            problem: "stokes2d_exp".into(),
            custom: None,
            mu: vec![1.0, 1e-4],
            levels: None,
            mesh_files: Vec::new(),
            qg: BoundaryProjection::Barycenter,
            method: Method::Minres,
            precond: None,
            tol: None,
            restart: 30,
            maxit: 1000,
            out: PathBuf::from("results"),
            consistent: true,
            load_degree: DEFAULT_LOAD_DEGREE,
            inner: InnerSolveConfig::default(),
        }
    }
}

/// A mesh together with the label used in output files.
#[derive(Debug, Clone)]
pub struct LabelledMesh {
    pub label: String,
    pub mesh: SimplicialMesh,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn dim(&self) -> Result<usize> {
        match self.problem.as_str() {
            "stokes2d_exp" => Ok(2),
            "stokes3d_trig" => Ok(3),
            "custom" => self
                .custom
                .as_ref()
                .map(|c| c.dim)
                .ok_or_else(|| Error::Config("problem `custom` needs a `custom` section".into())),
            other => Err(Error::Config(format!("unknown problem `{other}`"))),
        }
    }

    pub fn levels(&self) -> Result<Vec<usize>> {
        Ok(match &self.levels {
            Some(l) => l.clone(),
            None if self.dim()? == 3 => vec![2, 3, 4],
            None => vec![4, 8, 16, 32],
        })
    }

    pub fn tol(&self) -> Result<f64> {
        Ok(self.tol.unwrap_or(SolverConfig::default_tol(self.dim()?)))
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.dim()?;
        if self.mu.is_empty() {
            return Err(Error::Config("at least one viscosity is required".into()));
        }
        if let Some(mu) = self.mu.iter().find(|m| !(**m > 0.0) || !m.is_finite()) {
            return Err(Error::Config(format!("viscosity must be positive, got {mu}")));
        }
        if self.mesh_files.is_empty() {
            let levels = self.levels()?;
            if levels.is_empty() {
                return Err(Error::Config("at least one mesh level is required".into()));
            }
            if levels.contains(&0) {
                return Err(Error::Config("mesh levels must be positive".into()));
            }
        }
        if dim != 2 && dim != 3 {
            return Err(Error::Config(format!("unsupported dimension {dim}")));
        }
        if self.load_degree == 0 {
            return Err(Error::Config("load_degree must be positive".into()));
        }
        self.solver()?.validate()
    }

    pub fn solver(&self) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::new(self.method, self.tol()?);
        if let Some(p) = self.precond {
            cfg.preconditioner = p;
        }
        cfg.restart = self.restart;
        cfg.max_iter = self.maxit;
        cfg.inner = self.inner;
        Ok(cfg)
    }

    pub fn assembly(&self) -> AssemblyOptions {
        AssemblyOptions {
            projection: self.qg,
            load_degree: self.load_degree,
            parallel: true,
        }
    }

    pub fn problem(&self, mu: f64) -> Result<ManufacturedProblem> {
        match self.problem.as_str() {
            "stokes2d_exp" => stokes2d_exp(mu),
            "stokes3d_trig" => stokes3d_trig(mu),
            "custom" => custom_problem(
                self.custom
                    .as_ref()
                    .ok_or_else(|| Error::Config("problem `custom` needs a `custom` section".into()))?,
                mu,
            ),
            other => Err(Error::Config(format!("unknown problem `{other}`"))),
        }
    }

    pub fn meshes(&self) -> Result<Vec<LabelledMesh>> {
        let dim = self.dim()?;
        if !self.mesh_files.is_empty() {
            return self
                .mesh_files
                .iter()
                .map(|p| {
                    let mesh = SimplicialMesh::load(p, MeshFormat::from_path(p))?;
                    if mesh.dim() != dim {
                        return Err(Error::Config(format!(
                            "{} is {}-dimensional but the problem is {dim}-dimensional",
                            p.display(),
                            mesh.dim()
                        )));
                    }
                    let label = p
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_else(|| "mesh".into());
                    Ok(LabelledMesh { label, mesh })
                })
                .collect();
        }
        self.levels()?
            .into_iter()
            .map(|n| {
                let mesh = if dim == 2 {
                    SimplicialMesh::structured_tri(n)?
                } else {
                    SimplicialMesh::structured_tet(n)?
                };
                Ok(LabelledMesh {
                    label: format!("n{n}"),
                    mesh,
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(c.levels().unwrap(), vec![4, 8, 16, 32]);
        assert_eq!(c.tol().unwrap(), 1e-9);
        let s = c.solver().unwrap();
        assert_eq!((s.restart, s.max_iter), (30, 1000));
        assert_eq!(s.preconditioner, PreconditionerKind::BlockDiag);
        c.validate().unwrap();
    }

    #[test]
    fn three_dimensional_defaults() {
        let c = ExperimentConfig::from_json(r#"{"problem": "stokes3d_trig", "method": "gmres"}"#).unwrap();
        assert_eq!(c.tol().unwrap(), 1e-8);
        assert_eq!(c.solver().unwrap().preconditioner, PreconditionerKind::BlockLowerTri);
        assert_eq!(c.levels().unwrap(), vec![2, 3, 4]);
    }

    #[test]
    fn invalid_configs() {
        assert!(ExperimentConfig::from_json(r#"{"bogus": 1}"#).is_err());
        for text in [
            r#"{"levels": []}"#,
            r#"{"mu": [0.0]}"#,
            r#"{"mu": []}"#,
            r#"{"tol": 1.5}"#,
            r#"{"problem": "nope"}"#,
            r#"{"problem": "custom"}"#,
            r#"{"method": "minres", "precond": "block_lower_tri"}"#,
        ] {
            let c = ExperimentConfig::from_json(text).unwrap();
            assert!(matches!(c.validate(), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn custom_problem_section() {
        let c = ExperimentConfig::from_json(
            r#"{"problem": "custom", "custom": {"dim": 2, "f": ["0", "0"], "g": ["0", "0"]}, "levels": [2]}"#,
        )
        .unwrap();
        c.validate().unwrap();
        assert_eq!(c.problem(1.0).unwrap().dim, 2);
    }
}
