use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("boundary parameter h2 must be positive, got {0}")]
    NonPositiveH2(f64),

    #[error("matrix singular to working precision: pivot {pivot:e} in column {column} (largest {largest:e})")]
    Singular { column: usize, pivot: f64, largest: f64 },

    #[error("kernel query above the diagonal: t index {t} > x index {x}")]
    AboveDiagonal { x: usize, t: usize },

    #[error("invalid spectral data: {0}")]
    InvalidSpectralData(String),

    #[error("eigenvalue search failed: {reason} (searched {searched})")]
    EigenSearch { reason: String, searched: String },

    #[error("near-multiple eigenvalue at lambda = {lambda}: |dDelta/dlambda| = {derivative:e}")]
    MultipleEigenvalue { lambda: f64, derivative: f64 },

    #[error("GLM row system singular for rows {rows:?}")]
    GlmSingular { rows: Vec<usize> },

    #[error("corrupted kernel at node {index}: {detail}")]
    CorruptedKernel { index: usize, detail: String },

    #[error("boundary recovery failed: {0}")]
    BoundaryFit(String),

    #[error("test function is identically zero")]
    ZeroFunction,

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage { stage, source: Box::new(self) }
    }

    /// Innermost error, with any stage wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}
