use thiserror::Error;

/// Exit code for a successful run.
pub const EXIT_OK: i32 = 0;
/// A verification ran and failed its tolerance.
pub const EXIT_VERIFY_FAILED: i32 = 1;
/// Bad arguments, specs or input files.
pub const EXIT_USAGE: i32 = 2;
/// A numerical routine could not deliver a certified result.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] gfc_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use gfc_core::Error as E;
        match self {
            CliError::Core(E::InvalidParameter(_) | E::Unsupported(_) | E::MethodMismatch(_) | E::UnsupportedOrder { .. } | E::Resolution { .. }) => {
                EXIT_USAGE
            }
            CliError::Core(_) => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        }
    }
}
