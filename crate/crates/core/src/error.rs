use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// One violated configuration invariant, addressed by a dotted field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl Violation {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: argument outside domain ({detail})")]
    Domain { op: &'static str, detail: String },

    #[error("{op}: did not converge to tolerance")]
    Convergence { op: &'static str },

    #[error("{op}: numerical integration error estimate {estimate:e} exceeds {tolerance:e}")]
    Quadrature {
        op: &'static str,
        estimate: f64,
        tolerance: f64,
    },

    #[error("contention radius {0} m must exceed 1 m")]
    ContentionRadius(f64),

    #[error("ordered_gain_cdf: expansion needs {needed} terms, cap is {cap}")]
    TooManyTerms { needed: u128, cap: u128 },

    #[error("point pattern carries no time marks")]
    MissingMarks,

    #[error("closed form needs macro exponent 3 and femto exponent 4 (got {macro_exp} and {femto_exp}); use the numeric variant")]
    UnsupportedExponents { macro_exp: f64, femto_exp: f64 },

    #[error("invalid configuration: {}", join(.0))]
    InvalidConfig(Vec<Violation>),

    #[error("configuration parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }
}

fn join(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
