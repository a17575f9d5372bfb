use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("symbol {0} has no Lévy measure")]
    NoLevyMeasure(String),

    #[error("pole of the gamma function at {0}")]
    Pole(f64),

    #[error("path exhausted: t = {t} is beyond the last path value {last}")]
    PathExhausted { t: f64, last: f64 },

    #[error("step budget of {0} steps exceeded")]
    StepBudget(u64),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// Process exit code used by the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) | Error::NoLevyMeasure(_) | Error::Pole(_) => 1,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => 1,
            Error::PathExhausted { .. } | Error::StepBudget(_) | Error::Numerical(_) => 2,
        }
    }
}
