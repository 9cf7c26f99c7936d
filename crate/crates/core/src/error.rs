use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures while decoding a Standard MIDI File.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmfError {
    #[error("missing MThd header at offset 0")]
    MissingHeader,
    #[error("chunk at offset {offset} declares {declared} bytes but only {available} remain")]
    TruncatedChunk {
        offset: usize,
        declared: usize,
        available: usize,
    },
    #[error("invalid variable-length quantity at offset {offset}")]
    InvalidVlq { offset: usize },
    #[error("SMPTE time division {raw:#06x} is not supported")]
    SmpteDivision { raw: u16 },
    #[error("time division must be positive")]
    ZeroDivision,
    #[error("unsupported SMF format {0}")]
    UnsupportedFormat(u16),
    #[error("header chunk too short ({0} bytes)")]
    ShortHeader(usize),
    #[error("data byte {byte:#04x} at offset {offset} with no running status in scope")]
    DanglingStatus { offset: usize, byte: u8 },
    #[error("status byte {byte:#04x} at offset {offset} is not valid in a track chunk")]
    InvalidStatus { offset: usize, byte: u8 },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Smf(#[from] SmfError),
    #[error("corpus contains no tokens")]
    EmptyCorpus,
    #[error("need at least {needed} support points, got {got}")]
    InsufficientSupport { needed: usize, got: usize },
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("bracket [{lo}, {hi}] does not enclose a sign change")]
    BracketInvalid { lo: f64, hi: f64 },
    #[error("no convergence after {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("no n0 > 1 satisfies T/V = {ratio} (T/V must exceed 1)")]
    NoRoot { ratio: f64 },
    #[error("rank table is degenerate: all counts are equal")]
    DegenerateTable,
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("invalid duration grid: {0}")]
    InvalidGrid(String),
    #[error("input is not valid UTF-8: {0}")]
    Decode(#[from] std::str::Utf8Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    InFile {
        path: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn in_file(path: impl Into<String>, source: Error) -> Self {
        Error::InFile {
            path: path.into(),
            source: Box::new(source),
        }
    }

    /// Short machine-readable name used in structured warnings.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Smf(_) => "Smf",
            Error::EmptyCorpus => "EmptyCorpus",
            Error::InsufficientSupport { .. } => "InsufficientSupport",
            Error::Domain(_) => "DomainError",
            Error::BracketInvalid { .. } => "BracketInvalid",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::NoRoot { .. } => "NoRoot",
            Error::DegenerateTable => "DegenerateTable",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::Decode(_) => "DecodeError",
            Error::Io(_) => "Io",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
            Error::InFile { source, .. } => source.kind(),
        }
    }
}
