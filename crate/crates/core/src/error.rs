use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("derivative order {order} exceeds the supported cap {cap}")]
    UnsupportedOrder { order: usize, cap: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("method mismatch: {0}")]
    MethodMismatch(String),

    /// The requested accuracy could not be certified. `estimate` is the best
    /// available value and `error` its estimated absolute error.
    #[error("accuracy loss in {context}: best estimate {estimate:e}, estimated error {error:e}")]
    AccuracyLoss {
        context: String,
        estimate: f64,
        error: f64,
    },

    #[error("grid too coarse: {cells} cells in [0, t], at least {required} required")]
    Resolution { cells: usize, required: usize },

    #[error("simulation budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("non-finite result in {0}")]
    NonFinite(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub(crate) fn accuracy(context: impl Into<String>, estimate: f64, error: f64) -> Self {
        Error::AccuracyLoss {
            context: context.into(),
            estimate,
            error,
        }
    }

    /// True for errors caused by numerical accuracy rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::AccuracyLoss { .. } | Error::NonFinite(_) | Error::BudgetExceeded(_)
        )
    }
}
