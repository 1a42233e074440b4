use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("strategy {0} is outside [0, 1]")]
    StrategyOutOfRange(f64),

    #[error("impact is undefined: no cyclists before the intervention")]
    NoCyclistsBefore,

    #[error("strategy vectors differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("degenerate least-squares fit: {0}")]
    DegenerateFit(&'static str),

    #[error("social edge ({0}, {1}) already exists")]
    EdgeExists(usize, usize),

    #[error("invalid population: {0}")]
    InvalidPopulation(String),

    #[error("unsupported document version {0}")]
    UnsupportedVersion(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// True for errors caused by bad input (configuration, documents) rather
    /// than failures while running.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::StrategyOutOfRange(_)
                | Error::InvalidPopulation(_)
                | Error::UnsupportedVersion(_)
                | Error::Json(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
