use thiserror::Error;

/// Errors raised by the evaluators and builders in this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{name} out of domain: expected {expected}, got {got}")]
    Domain {
        name: &'static str,
        expected: &'static str,
        got: String,
    },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("pole of the series at s = {0}")]
    Pole(String),

    #[error("precision {0} bits outside the supported range [{min}, {max}]", min = crate::numeric::MIN_PRECISION, max = crate::numeric::MAX_PRECISION)]
    Precision(u32),

    #[error("quadrature did not converge after {levels} refinement levels (last change {last_change})")]
    QuadratureNotConverged { levels: u32, last_change: String },

    #[error("broken certificate: {0}")]
    BrokenCertificate(String),

    #[error("cannot parse {what} from {input:?}")]
    Parse { what: &'static str, input: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(name: &'static str, expected: &'static str, got: impl ToString) -> Self {
        Error::Domain {
            name,
            expected,
            got: got.to_string(),
        }
    }
}
