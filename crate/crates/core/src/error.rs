use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("tensor of order {order} contracted with {got} vectors")]
    ArityMismatch { order: usize, got: usize },

    #[error("certified operator norm supports dim <= 4 and order <= 4, got dim = {dim}, order = {order}")]
    UnsupportedSize { dim: usize, order: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no certified Poincaré constant for {0}")]
    Uncertified(String),

    #[error("spectral-gap oracle unreliable: lambda_1 moved from {coarse} to {fine} under grid refinement")]
    OracleUnreliable { coarse: f64, fine: f64 },

    #[error("moment ||w||_{p} does not stabilise under sample doubling; treated as infinite")]
    DivergentMoment { p: f64 },

    #[error("missing hypothesis: {0}")]
    MissingHypothesis(String),

    #[error("missing weight norm ||w||_{q}")]
    MissingWeightNorm { q: f64 },

    #[error("constant C = {c} is below the admissible threshold {threshold} for order {order}")]
    ConstantTooSmall { c: f64, threshold: f64, order: usize },

    #[error("coordinate {coord} is not centered (mean {mean})")]
    NotCentered { coord: usize, mean: f64 },

    #[error("calibration mismatch: {0}")]
    CalibrationMismatch(String),

    #[error("exponential moment unstable: half-sample estimates {first} and {second} differ by more than 10%")]
    HeavyTailUnstable { first: f64, second: f64 },

    #[error("certificate of kind {certificate} cannot be checked against a {report} report")]
    KindMismatch {
        certificate: &'static str,
        report: &'static str,
    },

    #[error("eigensolver did not converge")]
    NoConvergence,

    #[error("{discarded} of {total} draws discarded after eigensolver failures")]
    TooManyDiscarded { discarded: usize, total: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
