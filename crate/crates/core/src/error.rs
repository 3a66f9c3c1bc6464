use thiserror::Error;

use crate::gauss::HyperParams;
use crate::ids::PlayerId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no players supplied")]
    EmptyPlayers,

    #[error("duplicate player id {0}")]
    DuplicatePlayer(PlayerId),

    #[error("player {0} is not indexed")]
    UnknownPlayer(PlayerId),

    #[error("no observations")]
    NoObservations,

    #[error("{0} is not positive definite, even after jitter")]
    NotPositiveDefinite(&'static str),

    #[error("maximum likelihood fit did not converge after {iterations} iterations (best log-likelihood {loglik})")]
    NotConverged {
        iterations: usize,
        loglik: f64,
        best: Box<HyperParams>,
    },

    #[error("rank-deficient design; collinear columns: {}", columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("zero variance in {0}")]
    ZeroVariance(String),

    #[error("subset of {position} players has {n} rows, need at least {min}")]
    SubsetTooSmall {
        position: String,
        n: usize,
        min: usize,
    },

    #[error("missing covariate {0}")]
    MissingCovariate(String),

    #[error("season {season}: {source}")]
    Season {
        season: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn in_season(self, season: &str) -> Self {
        Error::Season {
            season: season.to_string(),
            source: Box::new(self),
        }
    }
}
