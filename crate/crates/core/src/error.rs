use thiserror::Error;

/// Errors produced anywhere in the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("size mismatch: expected {expected} samples, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("zero mode not invertible: negative Stokes power requires a drift-free field")]
    ZeroModeNotInvertible,

    #[error("Stokes operator with zero viscosity is not invertible")]
    ZeroViscosity,

    #[error("CFL violation: max velocity {max_velocity:.6e} allows dt <= {limit:.6e}, got dt = {dt:.6e}")]
    CflViolation { max_velocity: f64, limit: f64, dt: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown initial-data descriptor: {0}")]
    UnknownDescriptor(String),

    #[error("band outside grid: {0}")]
    BandOutsideGrid(String),

    #[error("interval [{t1}, {t2}] outside trajectory span [{start}, {end}]")]
    IntervalOutsideTrajectory { t1: f64, t2: f64, start: f64, end: f64 },

    #[error("invalid harmonic index: {0}")]
    InvalidHarmonicIndex(String),

    #[error("singularity: {0}")]
    Singularity(String),

    #[error("sample count mismatch: expected {expected} samples on quadrature nodes, got {got}")]
    NodeMismatch { expected: usize, got: usize },

    #[error("negative dissipation sample {value:.3e} at node {index}")]
    NegativeDissipation { index: usize, value: f64 },

    #[error("empty expansion")]
    EmptyExpansion,

    #[error("missing time derivative on trajectory sample at t = {0}")]
    MissingTimeDerivative(f64),

    #[error("zero field")]
    ZeroField,

    #[error("(r, s) = ({r}, {s}) not admissible: need 2/r + 3/s = 3/2 with 2 <= s <= 6, e.g. (inf, 2), (8, 12/5), (4, 3), (8/3, 4), (2, 6)")]
    InadmissibleExponents { r: f64, s: f64 },

    #[error("too few usable shells for spectral fit: {found} (need {needed})")]
    TooFewShells { found: usize, needed: usize },

    #[error("degenerate decay geometry: initial value {initial} does not exceed floor {floor}")]
    DegenerateGeometry { initial: f64, floor: f64 },

    #[error("trajectory too short: {found} samples, need {needed}")]
    TrajectoryTooShort { found: usize, needed: usize },

    #[error("mismatched ensemble members: {0}")]
    EnsembleMismatch(String),

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("unrecognized format")]
    UnrecognizedFormat,

    #[error("unsupported format version {0:?}")]
    VersionMismatch(String),

    #[error("unexpected end of payload")]
    UnexpectedEof,

    #[error("trailing bytes after payload")]
    TrailingBytes,

    #[error("nonzero forcing is not supported")]
    ForcingUnsupported,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
