use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid generator or experiment: {0}")]
    SpecInvalid(String),
    #[error(transparent)]
    Core(#[from] rankindep::Error),
    #[error("malformed input: {0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl SimError {
    /// Process exit code: 2 for bad input data, 3 for invalid requests.
    pub fn exit_code(&self) -> i32 {
        use rankindep::Error as E;
        match self {
            SimError::Input(_) | SimError::Io(_) | SimError::Csv(_) | SimError::Json(_) => 2,
            SimError::Core(
                E::TiesPresent { .. }
                | E::NonFinite { .. }
                | E::Shape(_)
                | E::SampleTooSmall { .. }
                | E::DimensionTooSmall { .. },
            ) => 2,
            SimError::Core(_) | SimError::SpecInvalid(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
