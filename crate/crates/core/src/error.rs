use thiserror::Error;

/// Errors raised by the simulator and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("the model needs at least one bath spin")]
    NoSpins,
    #[error("expected {expected} couplings, got {found}")]
    CouplingCount { expected: usize, found: usize },
    #[error("non-finite value for {0}")]
    NonFinite(&'static str),
    #[error("excitation number p={p} out of range for N={n} (need 0 <= p <= N-1)")]
    ExcitationOutOfRange { p: usize, n: usize },
    #[error("index {0} is already in the set")]
    IndexPresent(usize),
    #[error("index {0} is not in the set")]
    IndexAbsent(usize),
    #[error("spin index {index} out of range 1..={n}")]
    SpinIndex { index: usize, n: usize },
    #[error("pair indices must satisfy i < j, got i={i}, j={j}")]
    PairOrder { i: usize, j: usize },
    #[error("Rabi frequency is zero: no dynamics, no optimal measurement time")]
    NoDynamics,
    #[error("all couplings are zero")]
    ZeroCouplings,
    #[error("uniform coupling must be positive and finite")]
    NonPositiveCoupling,
    #[error("ladder step {step} out of range 1..={n}")]
    LadderStep { step: usize, n: usize },
    #[error("measurement schedule is empty")]
    EmptySchedule,
    #[error("schedule has {found} times, expected {expected}")]
    ScheduleLength { expected: usize, found: usize },
    #[error("ladder protocol assumes uniform couplings (alpha_j equal for all j)")]
    NonUniformCouplings,
    #[error("ladder protocol assumes zero detuning, got {0}")]
    NonZeroDetuning(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("sector dimension {dim} exceeds dense limit {max}")]
    SectorTooLarge { dim: usize, max: usize },
    #[error("full-space evolution limited to N <= {max}, got N={n}")]
    FullSpaceTooLarge { n: usize, max: usize },
    #[error("state norm deviates from 1 (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("measurement sampled a zero-probability branch")]
    ZeroProbabilityBranch,
    #[error("matrix is not a valid density matrix: {0}")]
    InvalidDensityMatrix(String),
    #[error("invalid probability series: {0}")]
    InvalidSeries(String),
    #[error("series spans {periods:.3} oscillation periods, need at least {required}")]
    SeriesTooShort { periods: f64, required: f64 },
    #[error("sampling interval {interval} exceeds aliasing limit {limit} for omega ~ {omega}")]
    Aliased {
        interval: f64,
        limit: f64,
        omega: f64,
    },
    #[error(
        "fit did not converge after {iterations} iterations (last relative step {last_step:e})"
    )]
    NoConvergence { iterations: usize, last_step: f64 },
    #[error("all counts are zero")]
    NoCounts,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
