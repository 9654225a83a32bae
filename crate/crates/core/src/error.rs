use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty range: {0}")]
    EmptyRange(String),

    #[error("invalid modulus {modulus}: {reason}")]
    InvalidModulus { modulus: u64, reason: &'static str },

    #[error("unsupported modulus {modulus}: {reason}")]
    UnsupportedModulus { modulus: u64, reason: &'static str },

    #[error("{value} is divisible by {p}")]
    DivisibleByModulus { value: i64, p: u64 },

    #[error("singular curve y^2 = x^3 + {a}x + {b} over F_{p}")]
    SingularCurve { p: u64, a: i64, b: i64 },

    #[error("unsupported prime {0}: curve operations need a prime p > 3")]
    UnsupportedPrime(u64),

    #[error("curves live over different fields (F_{0} and F_{1})")]
    FieldMismatch(u64, u64),

    #[error("isomorphism criterion needs all coefficients nonzero mod {0}; use direct search")]
    CriterionInapplicable(u64),

    #[error("trace {r} lies outside the Hasse interval for p = {p}")]
    OutsideHasse { p: u64, r: i64 },

    #[error("invalid discriminant {0}: need D < 0 and D = 0 or 1 mod 4")]
    InvalidDiscriminant(i64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("cache I/O: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by caller input rather than the environment.
    pub fn is_usage(&self) -> bool {
        !matches!(self, Error::Resource(_) | Error::Io(_) | Error::Json(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
