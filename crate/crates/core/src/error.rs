use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("image has no positive mass")]
    AllZero,
    #[error("image has significant negative entry {value:e} (threshold {threshold:e})")]
    NegativeMass { value: f64, threshold: f64 },
    #[error("image contains non-finite values")]
    NonFinite,
    #[error("shift ({sx}, {sy}) px is not a whole number of pixels")]
    NonIntegerShift { sx: f64, sy: f64 },
    #[error("cannot pad image of size {from} down to {to}")]
    ShrinkNotAllowed { from: usize, to: usize },
    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("input of size {size} exceeds limit {limit} for {what}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    #[error("projection at angle index {index} has no mass ({mass:e})")]
    EmptySlice { index: usize, mass: f64 },
    #[error("density is not normalized: sum = {0}")]
    NotNormalized(f64),
    #[error("transport problem infeasible: mass mismatch {0:e}")]
    Infeasible(f64),
    #[error("numerical underflow in {0}")]
    NumericalUnderflow(&'static str),
    #[error("solver did not converge after {0} iterations")]
    NotConverged(usize),
    #[error("metric {0} is not supported for this operation")]
    UnsupportedMetric(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("bad magic number {found:#010x}, expected {expected:#010x}")]
    BadMagic { found: u32, expected: u32 },
    #[error("malformed file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::EmptySlice { .. }
                | Error::Infeasible(_)
                | Error::NumericalUnderflow(_)
                | Error::NotConverged(_)
                | Error::NonFinite
        )
    }
}
