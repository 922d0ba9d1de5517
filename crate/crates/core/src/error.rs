use thiserror::Error;

/// Errors raised by the simulators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("mode set: {0}")]
    ModeSet(String),

    #[error("sector not finite: mode `{0}` has no occupation bound")]
    SectorNotFinite(String),

    #[error("empty sector: the charge rules admit no occupation tuple")]
    EmptySector,

    #[error("charge violation: term `{term}` changes conserved charge {rule} by {delta}")]
    ChargeViolation {
        term: String,
        rule: usize,
        delta: i64,
    },

    #[error("operator references mode index {index} but the sector has {modes} modes")]
    UnknownMode { index: usize, modes: usize },

    #[error("matrix is not Hermitian (max |H - H^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("time grid too coarse: spacing {spacing} exceeds {limit}")]
    GridTooCoarse { spacing: f64, limit: f64 },

    #[error("time series too short: {0}")]
    SeriesTooShort(String),

    #[error("propagator inconsistent: symplectic drift {drift:e} exceeds {tolerance:e}")]
    PropagatorInconsistent { drift: f64, tolerance: f64 },

    #[error("state violates the bosonic uncertainty relation (min eigenvalue {min_eigenvalue:e})")]
    Unphysical { min_eigenvalue: f64 },

    #[error("truncated Fock comparison refused: mean occupation {occupation} exceeds cutoff/10 = {limit}")]
    CutoffExceeded { occupation: f64, limit: f64 },

    #[error("chemical potential bracket failed: {0}")]
    NoBracket(String),

    #[error(
        "ground state did not converge after {steps} steps (relative energy change {residual:e})"
    )]
    NotConverged { steps: usize, residual: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error(
        "angular-spectrum aliasing bound violated at distance {distance:e}: \
         {fraction:e} of the spectrum lies beyond the sampled band; pad to at least {required} samples"
    )]
    Aliasing {
        distance: f64,
        fraction: f64,
        required: usize,
    },

    #[error("empty search range")]
    EmptySearchRange,

    #[error("degenerate object: intensity has zero variance")]
    DegenerateObject,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("format: {0}")]
    Format(String),

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
