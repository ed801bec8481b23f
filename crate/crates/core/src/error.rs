use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("cannot parse epoch {text:?}: {reason}")]
    EpochParse { text: String, reason: String },

    /// The propagated state dropped below the lowest altitude the force model covers.
    #[error("re-entry at {epoch}: altitude {altitude_m:.0} m is below the model floor")]
    Reentry { epoch: String, altitude_m: f64 },

    #[error("altitude {altitude_m:.0} m outside density table range [{min_m:.0}, {max_m:.0}] m")]
    AtmosphereDomain {
        altitude_m: f64,
        min_m: f64,
        max_m: f64,
    },

    #[error("gravity field supports degree/order up to {max}, requested {degree}x{order}")]
    GravityDegree {
        degree: usize,
        order: usize,
        max: usize,
    },

    #[error("gravity coefficient file line {line}: {reason}")]
    GravityFile { line: usize, reason: String },

    #[error("no collect probability for collect {0}")]
    MissingProbability(usize),

    #[error("configuration error: {0}")]
    Config(String),

    /// A pipeline stage failed.
    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
