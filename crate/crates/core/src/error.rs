use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid intensity model: {0}")]
    InvalidIntensity(String),

    #[error("cell {cell}: intensity integrates to zero, cannot calibrate k")]
    CalibrationImpossible { cell: usize },

    #[error("cell {cell}: calibration did not converge, last bracket k in [{lo}, {hi}]")]
    CalibrationDiverged { cell: usize, lo: f64, hi: f64 },

    #[error("cell {cell}: target {target} is out of reach, the expected survivor count peaks at {max_expected:.3}")]
    TargetUnreachable { cell: usize, target: u32, max_expected: f64 },

    #[error("target count must be at least 1 (got {0})")]
    InvalidTarget(u32),

    #[error("invalid thinning radius {0}")]
    InvalidRadius(f64),

    #[error("invalid ring hierarchy: {0}")]
    InvalidRings(String),

    #[error("invalid delay model: {0}")]
    InvalidDelayModel(String),

    #[error("invalid candidate grid: {0}")]
    InvalidCandidateGrid(String),

    #[error("instance too large for exhaustive search: {0}")]
    InstanceTooLarge(String),
}

pub type Result<T> = std::result::Result<T, Error>;
