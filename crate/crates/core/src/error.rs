use std::path::PathBuf;

use thiserror::Error;

/// Failures while building, reading or validating a simplicial mesh.
#[derive(Debug, Error)]
pub enum MeshError {
    #[error("number of subdivisions must be at least 1")]
    ZeroSubdivisions,
    #[error("unsupported spatial dimension {0} (expected 2 or 3)")]
    UnsupportedDimension(usize),
    #[error("element {index} is listed more than once (first at {first})")]
    DuplicateElement { index: usize, first: usize },
    #[error("element {index} is inverted (signed measure {signed_measure:e})")]
    InvertedElement { index: usize, signed_measure: f64 },
    #[error("element {index} is degenerate (measure {measure:e})")]
    DegenerateElement { index: usize, measure: f64 },
    #[error("mesh is disconnected: {components} components linked through interior facets")]
    Disconnected { components: usize },
    #[error("facet {vertices:?} is shared by {count} elements")]
    NonManifoldFacet { vertices: Vec<usize>, count: usize },
    #[error("unsupported cell type {0} (only triangles and tetrahedra are accepted)")]
    UnsupportedCellType(i64),
    #[error("element {element} references vertex {vertex} but the mesh has {num_vertices} vertices")]
    VertexOutOfRange {
        element: usize,
        vertex: usize,
        num_vertices: usize,
    },
    #[error("element index {0} out of range")]
    ElementOutOfRange(usize),
    #[error("mesh has no elements")]
    Empty,
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Failures from the sparse and dense kernels.
#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not symmetric (entry ({row}, {col}))")]
    NotSymmetric { row: usize, col: usize },
    #[error("incomplete Cholesky broke down after {attempts} shift attempts")]
    IcholBreakdown { attempts: usize },
    #[error("matrix is not positive definite on the Krylov space (p^T A p = {curvature:e} at iteration {iteration})")]
    Indefinite { iteration: usize, curvature: f64 },
    #[error("matrix is not symmetric positive definite")]
    NotSpd,
    #[error("dense verification size {size} exceeds the guard of {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("inner solve did not converge: relative residual {relres:e} after {iterations} iterations")]
    InnerSolveFailed { iterations: usize, relres: f64 },
    #[error("matrix market: {0}")]
    MatrixMarket(String),
}

/// Crate-level error.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("problem definition: {0}")]
    Problem(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
