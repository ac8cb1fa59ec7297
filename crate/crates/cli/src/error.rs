use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}:{line}:{column}: {message}", path.display())]
    Schema {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid config field `{field}`: {reason}")]
    Field { field: String, reason: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing {what} at {}; produce it first with `peierls {producer} --config <config>`", path.display())]
    MissingInput {
        what: &'static str,
        path: PathBuf,
        producer: &'static str,
    },

    #[error("{}: {message}", path.display())]
    BadInput { path: PathBuf, message: String },

    #[error(transparent)]
    Solver(#[from] peierls::Error),
}

impl CliError {
    /// 1 for solver failures (including unconverged solves), 2 for configuration and I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
