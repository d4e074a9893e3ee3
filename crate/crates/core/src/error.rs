use thiserror::Error;

/// Every failure mode of the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("not a density operator: {0}")]
    NotDensity(String),
    #[error("invalid clock: {0}")]
    InvalidClock(String),
    #[error("operation requires a cyclic clock")]
    RequiresCyclicClock,
    #[error("no solution in this sector: f(E) = -1 at populated eigenvalue E = {0}")]
    SingularSector(f64),
    #[error("every eigenvalue of the system Hamiltonian is excluded (f(E) = -1)")]
    AllExcluded,
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("clock reading {0} has zero weight: the conditioned state is unphysical at this reading")]
    UnphysicalReading(usize),
    #[error("no picture map exists: {0}")]
    NoPictureMap(String),
    #[error("no system-clock interaction present")]
    NoInteraction,
    #[error("spec mismatch: {0}")]
    SpecMismatch(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("singular parameter: {0}")]
    Singular(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
