use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("need at least {required} modes, got {got}")]
    InsufficientModes { required: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("is = {s}i lies on the spectrum (sigma_min = {sigma_min:e}, ||M|| = {norm:e})")]
    SpectrumHit { s: f64, sigma_min: f64, norm: f64 },

    #[error("rank-one correction is singular at s = {s}: |1 + q| = {modulus:e}")]
    KatoDenominatorSingular { s: f64, modulus: f64 },

    #[error("s = {s} coincides with the undamped frequency {lambda}")]
    UndampedPole { s: f64, lambda: f64 },

    #[error("mode {n} carries no damping")]
    UndampedMode { n: usize },

    #[error("mode range {lo}..={hi} leaves the validity window n <= {limit}")]
    ValidityWindow { lo: usize, hi: usize, limit: usize },

    #[error("{what}: {got} points, at least {required} required")]
    TooFewPoints { what: &'static str, got: usize, required: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("t = {t} exceeds the tabulated range (largest value {max})")]
    BeyondTable { t: f64, max: f64 },

    #[error("data error: {0}")]
    Data(String),

    #[error("no positive-increase exponent >= {floor} verified (best candidate {best})")]
    NoPositiveIncrease { floor: f64, best: f64 },

    #[error("precision exhausted after {} certified partial quotients", prefix.len())]
    PrecisionExhausted { prefix: Vec<u64> },

    #[error("integer overflow in exact arithmetic")]
    Overflow,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("linear algebra failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for failures of the computation itself, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SpectrumHit { .. }
                | Error::KatoDenominatorSingular { .. }
                | Error::UndampedPole { .. }
                | Error::UndampedMode { .. }
                | Error::NoPositiveIncrease { .. }
                | Error::PrecisionExhausted { .. }
                | Error::Overflow
                | Error::Numerical(_)
        )
    }
}
