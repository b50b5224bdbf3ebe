use std::fmt;

/// A position in a source file, 1-based line.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Location {
    pub file: String,
    pub line: u32,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.file, self.line)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("{loc}: {message}")]
    Parse { loc: Location, message: String },

    #[error("unknown option `{0}`")]
    UnknownOption(String),

    #[error("formula has {found} atoms, more than the bound of {bound}")]
    TooManyAtoms { found: usize, bound: usize },

    #[error("{found} options exceed the enumeration bound of {bound}")]
    TooManyOptions { found: usize, bound: usize },

    #[error("no valid configuration satisfies the feature model")]
    EmptySpace,

    #[error("bug specification is empty")]
    NoBugs,

    #[error("nothing to evaluate: the ranking is empty")]
    EmptyRanking,

    #[error("option sets differ: {0}")]
    OptionMismatch(String),

    #[error("invalid sample plan: {0}")]
    InvalidPlan(String),

    #[error("inconsistent assignment: option `{0}` is both enabled and disabled")]
    Inconsistent(String),

    #[error("malformed {what} at line {line}: {message}")]
    Format {
        what: &'static str,
        line: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn parse(file: &str, line: u32, message: impl Into<String>) -> Self {
        Error::Parse {
            loc: Location {
                file: file.to_string(),
                line,
            },
            message: message.into(),
        }
    }

    pub(crate) fn format(what: &'static str, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            what,
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
