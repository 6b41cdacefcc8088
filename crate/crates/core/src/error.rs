use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty parameter space")]
    EmptySpace,
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: &'static str },
    #[error("duplicate parameter name `{0}`")]
    DuplicateParameter(String),
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("sampler supports at most {max} dimensions, got {got}")]
    TooManyDimensions { max: usize, got: usize },
    #[error("constant output")]
    ConstantOutput,
    #[error("{count} non-finite model outputs")]
    FailedEvaluations { count: usize },
    #[error("second-order design required")]
    SecondOrderRequired,
    #[error("insufficient samples for term count: {rows} rows for {terms} terms")]
    InsufficientSamples { rows: usize, terms: usize },
    #[error("fraction must lie in (0, 1], got {0}")]
    InvalidFraction(f64),
    #[error("altitude {0} m outside the supported range [0, 20000] m")]
    AltitudeOutOfRange(f64),
    #[error("negative fuel fraction")]
    NegativeFuelFraction,
    #[error("invalid model input: {0}")]
    InvalidInput(String),
    #[error("evaluation failed: {0}")]
    EvaluationFailed(&'static str),
    #[error("invalid bounds for `{0}`")]
    InvalidBounds(String),
    #[error("infeasible problem")]
    Infeasible,
    #[error("model fails at initial guess")]
    InitialGuessFails,
}

pub type Result<T> = core::result::Result<T, Error>;
