use thiserror::Error;

/// Unified error type for the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value lies outside the domain where the requested
    /// operation is defined (zero wavevector, speed past a propagation bound,
    /// a non-invertible dispersion branch, and so on).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Scenario validation failed.  Each entry describes one violated
    /// constraint in plain text.
    #[error("scenario validation failed:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),

    /// The scattering cascade outgrew its event budget.  `depth` is the
    /// deepest product generation reached before the run was aborted.
    #[error("event budget exhausted after {events} events (deepest product generation {depth})")]
    EventExplosion { depth: u32, events: usize },

    /// No causal signal path connects the source to the receiver for the
    /// requested observation time.
    #[error("no signal path reaches the receiver at the requested observation time")]
    UnreachablePath,

    /// A scenario file could not be parsed.  `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Filesystem trouble while reading or writing run artifacts.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand constructor for [`Error::InvalidInput`].
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
