use thiserror::Error;

/// Errors raised by distribution constructors, detection transforms,
/// criterion evaluators, and simulation configs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A scalar parameter lies outside its allowed range.
    #[error("{name} = {value} violates constraint: {constraint}")]
    Domain {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// An integer parameter lies outside its allowed range.
    #[error("{name} = {value} violates constraint: {constraint}")]
    DomainInt {
        name: &'static str,
        value: i64,
        constraint: &'static str,
    },

    /// An index addressed a bin outside the stored range.
    #[error("{what} index {index} exceeds stored maximum {max}")]
    OutOfRange {
        what: &'static str,
        index: usize,
        max: usize,
    },

    /// A probability table failed range or normalization checks.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// Histogram counts contradict the recorded number of trials.
    #[error("histogram counts sum to {sum} but only {trials} trials were recorded")]
    CountsExceedTrials { sum: u64, trials: u64 },

    /// A config built for one experiment geometry was handed to the
    /// simulator of the other.
    #[error("config selects {found} geometry but the {expected} simulator was called")]
    GeometryMismatch {
        expected: &'static str,
        found: &'static str,
    },

    /// A conditional slice holds no events, so it cannot be normalized.
    #[error("no events recorded at trigger value {trigger}")]
    EmptyConditional { trigger: usize },

    /// Too much probability sits beyond the stored range for moments over
    /// the stored bins to be trustworthy.
    #[error("tail mass {tail_mass:.3e} exceeds {limit} so moments over the stored range are unreliable")]
    UnreliableMoments { tail_mass: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
