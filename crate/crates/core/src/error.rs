use thiserror::Error;

/// Errors raised by model validation and by the leakage computations.
///
/// Variants that concern a specific input or output carry its label so that
/// callers can report it without index bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("cannot parse `{0}` as a probability or ratio")]
    Parse(String),
    #[error("row for input `{label}` sums to {sum}, not 1")]
    NonStochasticRow { label: String, sum: String },
    #[error("prior sums to {0}, not 1")]
    NonStochasticPrior(String),
    #[error("negative entry {value} at `{label}`")]
    NegativeEntry { label: String, value: String },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("prior has empty support")]
    EmptySupport,
    #[error("`{0}` is outside the support")]
    OutOfSupport(String),
    #[error("epsilon ratio {0} is below 1")]
    InvalidEpsilon(String),
    #[error("delta {0} is not in the admissible range")]
    InvalidDelta(String),
    #[error("split weight {0} is not in the admissible range")]
    InvalidZeta(String),
    #[error("event is empty")]
    EmptyEvent,
    #[error("event has zero probability")]
    ZeroProbabilityEvent,
    #[error("no second-stage channel for first-stage output `{0}`")]
    MissingStage(String),
    #[error("gain function has zero expected gain under the prior")]
    ZeroBaselineGain,
    #[error("gain function has zero expected gain after observing `{0}`")]
    ZeroPosteriorGain(String),
    #[error("construction needs {size} letters, above the limit of {limit}")]
    AlphabetTooLarge { size: usize, limit: usize },
    #[error("bound requires a finite epsilon")]
    InfiniteInput,
    #[error("unknown f-divergence `{0}` (expected kl, tv or chi2)")]
    UnknownF(String),
    #[error(
        "joint support has {support} cells, above the brute-force cap of {cap}; \
         sufficient bound is {fallback}"
    )]
    TooLargeForBruteForce {
        support: usize,
        cap: usize,
        fallback: String,
    },
    #[error("oracle budget exceeded: {what} is {size}, limit {limit}")]
    BudgetExceeded {
        what: &'static str,
        size: usize,
        limit: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Whether the error arose in a computation on a valid model, as opposed
    /// to malformed or inconsistent input.
    pub fn is_computational(&self) -> bool {
        matches!(
            self,
            Error::ZeroProbabilityEvent
                | Error::ZeroBaselineGain
                | Error::ZeroPosteriorGain(_)
                | Error::AlphabetTooLarge { .. }
                | Error::InfiniteInput
                | Error::TooLargeForBruteForce { .. }
                | Error::BudgetExceeded { .. }
        )
    }
}
