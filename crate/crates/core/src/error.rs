use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("map: {0}")]
    Map(#[from] MapError),

    #[error("config: {0}")]
    Config(#[from] ConfigError),

    #[error("degenerate link: snr must be positive, got {0}")]
    NonPositiveSnr(f64),

    #[error("agent position estimate coincides with the target, bearing undefined")]
    UndefinedBearing,

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapError {
    #[error("map is empty")]
    Empty,

    #[error("row {row} has {found} cells, expected {expected}")]
    NotRectangular {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("unknown glyph {glyph:?} at row {row}, column {col}")]
    UnknownGlyph { row: usize, col: usize, glyph: char },

    #[error("expected exactly one target, found {0}")]
    TargetCount(usize),

    #[error("agent start {0} appears more than once")]
    DuplicateAgent(u8),

    #[error("agent starts must be numbered 1..=n without gaps, missing {0}")]
    MissingAgent(u8),

    #[error("agent start ({x}, {y}) is not a free cell")]
    AgentStartBlocked { x: i32, y: i32 },

    #[error("cell ({x}, {y}) is outside the {width}x{height} grid")]
    OutOfBounds {
        x: i32,
        y: i32,
        width: usize,
        height: usize,
    },

    #[error("target cell ({x}, {y}) is not free")]
    TargetBlocked { x: i32, y: i32 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected key=value, got {text:?}")]
    Syntax { line: usize, text: String },

    #[error("unknown key {0:?}")]
    UnknownKey(String),

    #[error("key {key:?}: cannot parse {value:?}")]
    BadValue { key: String, value: String },

    #[error(
        "unknown variant {0:?} (expected instrumental-mf, pit-mf, instrumental-mfmb or pit-mfmb)"
    )]
    UnknownVariant(String),

    #[error("{0}")]
    Invalid(String),
}
