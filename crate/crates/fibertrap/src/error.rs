use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed or inconsistent input data.
    #[error("input error: {0}")]
    Input(String),

    /// Configuration file failed to parse or validate.
    #[error("config error: {0}")]
    Config(String),

    /// A numerical routine failed to produce a usable result.
    #[error("solver error: {0}")]
    Solver(String),

    /// Iteration limit reached without meeting the convergence criterion.
    #[error("did not converge: {0}")]
    NonConvergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Wrap an io error with the path it concerns.
    pub(crate) fn io_context(path: &std::path::Path, e: std::io::Error) -> Error {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    }

    /// Process exit code for the CLI: 2 for config/input problems, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Input(_) | Error::Config(_) | Error::Io(_) => 2,
            Error::Solver(_) | Error::NonConvergence(_) => 3,
        }
    }
}
