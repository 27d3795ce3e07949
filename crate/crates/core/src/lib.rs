//! Lowest-order weak Galerkin discretization of Stokes flow, with
//! consistency enforcement for the singular saddle-point system and block
//! Schur complement preconditioned MINRES/GMRES solvers.

pub mod assembly;
pub mod cli;
pub mod config;
pub mod error;
pub mod geom;
pub mod krylov;
pub mod mesh;
pub mod output;
pub mod problem;
pub mod quadrature;
pub mod sparse;
pub mod verification;
pub mod wg;

pub use error::{Error, LinalgError, MeshError, Result};
pub use mesh::{ElementGeometry, FacetRecord, MeshFormat, MeshStats, SimplicialMesh};
