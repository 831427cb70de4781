use crate::statelib::ParseError;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("subsystem dimensions must all be >= 2 with at least two subsystems, got {0:?}")]
    InvalidDims(alloc::vec::Vec<usize>),
    #[error("subsystem {subsystem}: level {level} out of range 0..{dim}")]
    DigitOutOfRange {
        subsystem: usize,
        level: usize,
        dim: usize,
    },
    #[error("expected {expected} digits, got {got}")]
    DigitCount { expected: usize, got: usize },
    #[error("subsystem {subsystem} out of range 1..={count}")]
    SubsystemOutOfRange { subsystem: usize, count: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("Gell-Mann basis needs d >= 2, got {0}")]
    GellMannDimension(usize),
    #[error("invalid pair ({first}, {second}) with eta {eta}: members must differ and eta must be positive")]
    InvalidPair { first: usize, second: usize, eta: f64 },
    #[error("{0} requires three qubits")]
    NeedsThreeQubits(&'static str),
    #[error("Bell index must be 1, 2 or 3, got {0}")]
    BellIndex(usize),
    #[error("superposition is degenerate (norm {0:e})")]
    DegenerateSuperposition(f64),
    #[error("invalid configuration: {field} {constraint}")]
    Config {
        field: &'static str,
        constraint: &'static str,
    },
    #[error("numerical failure at s = {s}")]
    NumericalFailure { s: f64 },
    #[error(transparent)]
    Parse(#[from] ParseError),
}
