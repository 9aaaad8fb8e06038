use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("polynomial degree k = {0} is not supported: the method requires k >= 1")]
    DegreeTooLow(usize),

    #[error("stabilization parameter eta = {0} must be strictly positive")]
    NonPositiveEta(f64),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("non-conforming connectivity: {0}")]
    Connectivity(String),

    #[error("element {element} has zero or negative area ({area:e})")]
    DegenerateElement { element: usize, area: f64 },

    #[error("face between vertices {a} and {b} has zero length")]
    DegenerateFace { a: usize, b: usize },

    #[error("refinement is not supported for {0}")]
    UnsupportedRefinement(String),

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },

    #[error("singular local system on element {element}: {context}")]
    SingularLocal { element: usize, context: String },

    #[error("linear solver failure: {0}")]
    Solver(String),

    #[error("invalid material tensor: {0}")]
    Material(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("level {level}: {source}")]
    AtLevel {
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
