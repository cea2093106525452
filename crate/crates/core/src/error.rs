use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty waveform")]
    EmptyWaveform,
    #[error("singular parameter must be positive")]
    SingularParameter,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid integrator options: {0}")]
    InvalidOptions(String),
    #[error("stiffness failure at t={t}: step size underflow (h={h:e})")]
    StiffnessFailure { t: f64, h: f64 },
    #[error("divergence at t={t}")]
    Divergence { t: f64 },
    #[error("step budget exhausted at t={t}")]
    TooManySteps { t: f64 },
    #[error("non-oscillatory trajectory")]
    NonOscillatory,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("degenerate waveform")]
    DegenerateWaveform,
    #[error("multiplier branch undefined")]
    MultiplierUndefined,
    #[error("R7 undefined")]
    R7Undefined,
    #[error("netlist parse error on line {line}: {msg}")]
    NetlistParse { line: usize, msg: String },
    #[error("malformed CSV at row {row}: {msg}")]
    Csv { row: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
