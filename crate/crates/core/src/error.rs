use thiserror::Error;

/// First failing pair recorded for a rejected offset candidate.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct CandidateViolation {
    pub candidate: Vec<usize>,
    pub u: usize,
    pub v: usize,
    pub distance: usize,
    pub required: u64,
    pub observed: u64,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("construction stuck at t={t}: all {} candidates rejected", rejected.len())]
    ConstructionStuck {
        t: usize,
        rejected: Vec<CandidateViolation>,
    },

    #[error("search budget exhausted; value lies in [{lo}, {}]", hi.map_or("?".to_string(), |h| h.to_string()))]
    Unresolved { lo: u64, hi: Option<u64> },

    #[error("no certificate subgraph could be derived and none was supplied")]
    CertificateMissing,

    #[error("certificate rejected: {0}")]
    CertificateRejected(String),

    #[error("integer overflow while evaluating {0}")]
    Overflow(&'static str),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
