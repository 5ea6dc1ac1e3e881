use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point outside the foliation domain: t = {t}, r = {r} (need t > r)")]
    OutsideFoliation { t: f64, r: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("warmup incomplete: need {needed} buffered levels, have {have}")]
    WarmupIncomplete { needed: usize, have: usize },

    #[error("insufficient history: t = {t} outside buffered range [{start}, {end}]")]
    InsufficientHistory { t: f64, start: f64, end: f64 },

    #[error("multi-index order {order} exceeds configured maximum {max}")]
    OrderExceeded { order: usize, max: usize },

    #[error("blowup/instability detected at t = {t}")]
    Blowup { t: f64 },

    #[error("support violation at t = {t}: |field| = {value:e} outside r <= t - 1 + {slack}")]
    SupportViolation { t: f64, value: f64, slack: f64 },

    #[error("unknown profile id '{0}'")]
    UnknownProfile(String),

    #[error("unknown identity id '{0}'")]
    UnknownIdentity(String),

    #[error("unknown preset '{0}'")]
    UnknownPreset(String),

    #[error("line {line}: key '{key}': {message}")]
    Config {
        line: usize,
        key: String,
        message: String,
    },

    #[error("epsilon required")]
    EpsilonRequired,

    #[error("fit rejected: {0}")]
    Fit(String),

    #[error("inconsistency: {0}")]
    Inconsistent(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed dump: {0}")]
    Dump(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
