use thiserror::Error;

/// Errors raised while building models, solving them, or running batch jobs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("steady state is not unique: nullity {nullity}")]
    Multiplicity { nullity: usize },

    #[error("linear system is ill-conditioned (condition estimate {estimate:.3e})")]
    Conditioning { estimate: f64 },

    #[error("predicted peak at {position:.4} lies outside the frequency grid [{min:.4}, {max:.4}]")]
    Coverage { position: f64, min: f64, max: f64 },

    #[error("line {line}: `{key}`: {message}")]
    Parse {
        line: usize,
        key: String,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit status: 1 for bad input, 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::Domain(_)
            | Error::Coverage { .. }
            | Error::Parse { .. }
            | Error::Io(_)
            | Error::Csv(_) => 1,
            Error::Dimension { .. } | Error::Multiplicity { .. } | Error::Conditioning { .. } => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
