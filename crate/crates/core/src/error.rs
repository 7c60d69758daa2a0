use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A query point lies outside a tabulated or certified range.
    #[error("range error: {0}")]
    Range(String),

    /// A stated precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A hypothesis of the construction (divergence, regularity bound) fails.
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    /// A table failed one of its build-time invariants.
    #[error("build failed: {0}")]
    Build(String),

    /// Cancellation destroyed the significance of a series sum.
    ///
    /// `log_bound` is an upper bound for `log|f(z)|` that is still valid.
    #[error("precision loss: |sum| below {rel:e} of the largest term (log|f| <= {log_bound})")]
    PrecisionLoss { rel: f64, log_bound: f64 },

    /// A coefficient scan did not terminate within the configured cap.
    #[error("coefficient scan exceeded hard cap n = {0}")]
    ScanCap(u64),

    /// Too few angles requested for a maximum-modulus scan.
    #[error("angular budget {0} is below the minimum of 8")]
    Budget(usize),

    /// The two routes to the logarithmic derivative disagree.
    #[error("log-derivative disagreement at r = {r}: finite difference {fd}, logd {logd}, tolerance {tol}")]
    Disagreement { r: f64, fd: f64, logd: f64, tol: f64 },

    /// Too many samples were dropped from a disk verification.
    #[error("{excluded} of {total} disk samples excluded")]
    Excluded { excluded: usize, total: usize },

    /// A textual specification could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// Numerical routine failed to converge.
    #[error("no convergence: {0}")]
    Convergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
