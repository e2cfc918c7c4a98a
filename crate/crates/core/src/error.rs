use thiserror::Error;

/// Errors raised anywhere in the pipeline.
///
/// Each variant maps onto a coarse category (see [`Error::category`]) that the
/// command-line front end turns into a distinct exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("horizon {requested} out of range (available {available})")]
    OutOfRange { requested: usize, available: usize },

    #[error("time step mismatch: {0} vs {1}")]
    DtMismatch(f64, f64),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("horizon mismatch: need {needed} frames, got {got}")]
    Horizon { needed: usize, got: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("value out of range: {0}")]
    Domain(String),

    #[error("training diverged at batch {batch} (epoch {epoch}): loss = {loss}")]
    Divergence { epoch: usize, batch: usize, loss: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Machine-readable error category.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Input,
    Config,
    Schema,
    MissingFile,
    Divergence,
}

impl Category {
    pub fn name(self) -> &'static str {
        match self {
            Category::Input => "input",
            Category::Config => "config",
            Category::Schema => "schema",
            Category::MissingFile => "missing-file",
            Category::Divergence => "divergence",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Category::Input => 7,
            Category::Config => 3,
            Category::Schema => 4,
            Category::MissingFile => 5,
            Category::Divergence => 6,
        }
    }
}

impl Error {
    pub fn category(&self) -> Category {
        match self {
            Error::Config(_) => Category::Config,
            Error::Schema(_) | Error::Json(_) => Category::Schema,
            Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => {
                Category::MissingFile
            }
            Error::Divergence { .. } => Category::Divergence,
            _ => Category::Input,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
