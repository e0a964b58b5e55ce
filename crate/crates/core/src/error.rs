use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("ambient dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("invalid representation: {0}")]
    InvalidRepresentation(String),

    #[error("spectral gap ambiguity after {attempts} attempts: {detail}")]
    GapAmbiguity { attempts: usize, detail: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("missing measured value for probe `{0}`")]
    MissingProbe(String),

    #[error("morphism does not preserve the observable algebra (basis element {index}, residual {residual:.3e})")]
    MorphismNotAlgebraic { index: usize, residual: f64 },

    #[error("implementing relation violated for label `{label}` at basis element {index} (residual {residual:.3e})")]
    ImplementingRelation { label: String, index: usize, residual: f64 },

    #[error("operator is not in the observable algebra (residual {0:.3e})")]
    NotObservable(f64),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}
