use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh parameters: {0}")]
    InvalidMesh(String),

    #[error("degenerate element {element}: |det J| = {det:e}")]
    DegenerateElement { element: usize, det: f64 },

    #[error("non-manifold facet {vertices:?}: shared by more than two elements")]
    NonManifoldFacet { vertices: Vec<usize> },

    #[error("inconsistent facet permutation {permutation:?} for local facet {local_facet}")]
    InvalidPermutation {
        local_facet: usize,
        permutation: Vec<usize>,
    },

    #[error("singular compliance tensor: 2mu + d*lambda = {0}")]
    SingularCompliance(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("saddle-point system is singular ({context}): {reason}")]
    Singular { context: String, reason: String },

    #[error("iterative solver did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("invalid convergence input: {0}")]
    InvalidLevels(String),

    #[error("diagnostic failed: {0}")]
    Diagnostic(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
