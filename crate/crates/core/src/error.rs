use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("excitation sector {0} is not supported (three-level atoms cap sectors at 2)")]
    UnsupportedSector(usize),

    #[error("basis state {0} is not part of this basis")]
    NotFound(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("state is in sector {actual}, expected sector {expected}")]
    WrongSector { expected: usize, actual: usize },

    #[error("propagation failed to converge on interval [{t_start}, {t_end}]: {reason}")]
    Convergence {
        t_start: f64,
        t_end: f64,
        reason: String,
    },

    #[error("numerical integrity violated: {0}")]
    NumericalIntegrity(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("three-point decoherence-free solutions merge or vanish for zeta = {0} >= 2")]
    DegenerateMerge(f64),
}
