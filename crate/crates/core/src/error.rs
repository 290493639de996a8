use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("column `{0}` not found in header")]
    MissingColumn(String),

    #[error("line {line}: arm value `{value}` is neither the control nor the treatment label")]
    InvalidArm { line: usize, value: String },

    #[error("cluster `{0}` appears in both arms")]
    ClusterInBothArms(String),

    #[error("{0} arm has no clusters")]
    EmptyArm(&'static str),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate response: {0}")]
    Degenerate(String),

    #[error("REML optimizer did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("degrees of freedom must be positive for Student t critical values (got {0}); set a df override or use normal critical values")]
    InvalidDf(i64),

    #[error("target {target} is outside the achievable range [{low}, {high}]")]
    Unattainable { target: f64, low: f64, high: f64 },

    #[error("correlation structure is not positive semi-definite: {0}")]
    NotPsd(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{failed} of {total} replicates failed (limit is 1%)")]
    TooManyFailures { failed: usize, total: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
