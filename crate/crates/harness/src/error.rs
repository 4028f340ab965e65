use thiserror::Error;

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Args(String),
    #[error("no images with label {0}")]
    EmptySet(u8),
    #[error("image set is empty")]
    NoImages,
    #[error("{images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("expected square images, got {rows}x{cols}")]
    DimMismatch { rows: usize, cols: usize },
    #[error("missing input file {0}")]
    MissingFile(String),
    #[error(transparent)]
    Core(#[from] slicealign::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// Process exit code: 2 bad arguments, 3 data error, 4 numeric failure.
    pub fn exit_code(&self) -> i32 {
        use slicealign::Error as E;
        match self {
            HarnessError::Args(_) => 2,
            HarnessError::Core(e) if e.is_numeric() => 4,
            HarnessError::Core(
                E::InvalidParameter(_)
                | E::UnsupportedMetric(_)
                | E::TooLarge { .. }
                | E::NonIntegerShift { .. }
                | E::ShrinkNotAllowed { .. },
            ) => 2,
            _ => 3,
        }
    }
}
