use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QtError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),

    #[error("inconsistent constant term: am[0]/ap[0] must agree")]
    InconsistentConstant,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is numerically singular")]
    Singular,

    #[error("eigenvalue iteration did not converge")]
    ConvergenceFailure,

    #[error("λ lies on the symbol curve a(𝕋) (root of modulus {modulus} on the unit circle)")]
    OnCurve { modulus: f64 },

    #[error("finite section of size {size} is smaller than the required {min}")]
    SectionTooSmall { size: usize, min: usize },

    #[error("prefix of length {len} is too short, need at least {needed}")]
    PrefixTooShort { len: usize, needed: usize },

    #[error("Wiener-Hopf factorization is unstable (relative residual {0:e})")]
    FactorizationUnstable(f64),

    #[error("roots inside the unit disk are clustered; use the Frobenius basis")]
    ClusteredRoots,

    #[error("derivative of det Φ vanishes; Newton step undefined")]
    DerivativeVanishes,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub type Result<T> = std::result::Result<T, QtError>;
