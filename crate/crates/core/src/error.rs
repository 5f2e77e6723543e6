use thiserror::Error;

/// Every failure the simulator can report.
///
/// Operations validate their inputs up front, so each variant names the first
/// offending item rather than a downstream symptom.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("signal has no samples")]
    EmptySignal,
    #[error("sample {0} is not finite")]
    NonFiniteSample(usize),
    #[error("sample rate must be positive and finite, got {0}")]
    InvalidSampleRate(f64),
    #[error("gain code must be in 0..=3, got {0}")]
    InvalidGainCode(i64),
    #[error("invalid gain table: {0}")]
    InvalidGainTable(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("length mismatch: {left} vs {right} samples")]
    LengthMismatch { left: usize, right: usize },
    #[error("sample rate mismatch: {left} Hz vs {right} Hz")]
    SampleRateMismatch { left: f64, right: f64 },
    #[error("threshold at sample {0} is not positive")]
    NonPositiveThreshold(usize),
    #[error("event stream has zero source length")]
    EmptyStreamLength,
    #[error("invalid event stream: {0}")]
    InvalidEventStream(String),
    #[error("high-pass cutoff {cutoff_hz} Hz must lie in (0, {nyquist_hz}) Hz")]
    InvalidCutoff { cutoff_hz: f64, nyquist_hz: f64 },
    #[error("invalid synthesis spec: {0}")]
    InvalidSpec(String),
    #[error("saturated regime: observed {max_rate_hz} events/s, limit {limit_hz} events/s")]
    SaturatedRegime { max_rate_hz: f64, limit_hz: f64 },
    #[error("no sweep records")]
    EmptyRecords,
}

pub type Result<T> = std::result::Result<T, Error>;
