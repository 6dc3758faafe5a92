use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("fewer than 2 non-missing values (got {present})")]
    AllMissing { present: usize },
    #[error("non-finite value {value} at position {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("values and missing mask differ in length ({values} vs {mask})")]
    LengthMismatch { values: usize, mask: usize },
    #[error("variable has zero mid-rank spread")]
    DegenerateVariable,
    #[error("score basis is rank deficient at component {component} (requested {requested})")]
    RankDeficient { component: usize, requested: usize },
    #[error("invalid truncation point {0}; expected 1..=6")]
    InvalidTruncation(usize),
    #[error("too few samples: need more than {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("class {label} has {count} members; need at least 2")]
    EmptyClass { label: u8, count: usize },
    #[error("score argument {0} outside (0, 1)")]
    OutOfDomain(f64),
    #[error("need at least {needed} items, got {got}")]
    TooFewItems { needed: usize, got: usize },
    #[error("null spread is zero")]
    ZeroSpread,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}:{row}:{column}: {message}")]
    Parse {
        path: String,
        row: usize,
        column: String,
        message: String,
    },
    #[error("label column `{column}`: {message}")]
    Label { column: String, message: String },
    #[error("variable `{name}`: {source}")]
    Variable {
        name: String,
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
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by malformed input files.
    pub fn is_parse(&self) -> bool {
        if let Error::Variable { source, .. } = self {
            return source.is_parse();
        }
        matches!(
            self,
            Error::Parse { .. } | Error::Label { .. } | Error::Csv(_) | Error::NonFinite { .. }
        )
    }

    /// True for errors caused by invalid settings.
    pub fn is_config(&self) -> bool {
        if let Error::Variable { source, .. } = self {
            return source.is_config();
        }
        matches!(
            self,
            Error::Config(_) | Error::InvalidTruncation(_) | Error::TooFewItems { .. }
        )
    }
}
