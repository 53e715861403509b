use thiserror::Error;

/// Errors produced by the scattering and timing pipelines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid barrier: {0}")]
    InvalidBarrier(String),

    #[error("barrier is not symmetric about its centre (max asymmetry {max_asymmetry:e})")]
    Asymmetric { max_asymmetry: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid unit system: {0}")]
    InvalidUnits(String),

    #[error("ODE integration failed at x = {x}: {reason}")]
    Integration { x: f64, reason: String },

    #[error("degenerate stationary basis at k = {k}: |Q| = {q_abs:e}, |P| = {p_abs:e}")]
    DegenerateBasis { k: f64, q_abs: f64, p_abs: f64 },

    #[error("analytic basis overflows at k = {k} (kappa*d/2 = {exponent}); use the closed forms")]
    BasisOverflow { k: f64, exponent: f64 },

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("phase grid too coarse: jump of {jump} rad between k = {k_left} and k = {k_right}")]
    GridTooCoarse { k_left: f64, k_right: f64, jump: f64 },

    #[error("spatial domain truncated at t = {t}: boundary density ratio {ratio:e}; try [{suggested_lo}, {suggested_hi}]")]
    DomainTruncated {
        t: f64,
        ratio: f64,
        suggested_lo: f64,
        suggested_hi: f64,
    },

    #[error("centre of mass never crosses x = {level}")]
    NoCrossing { level: f64 },

    #[error("finite difference did not converge (relative disagreement {disagreement:e}); try step {suggested_step:e}")]
    FiniteDifference {
        disagreement: f64,
        suggested_step: f64,
    },

    #[error("time window too short: edge integrand ratio {ratio:e}")]
    TimeWindow { ratio: f64 },

    #[error("Larmor frequency too large: {0}")]
    LarmorField(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by user input rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
