use std::fmt;

use crate::scenario::Side;

/// A single violated configuration invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: &'static str,
    pub bound: String,
}

impl Violation {
    pub(crate) fn new(field: &'static str, bound: impl Into<String>) -> Self {
        Self {
            field,
            bound: bound.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated", self.bound)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid config: {}", join(.0))]
    InvalidConfig(Vec<Violation>),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("infeasible amplification: a_R^2 + a_T^2 = {used:e} exceeds budget {budget:e}")]
    Infeasible { used: f64, budget: f64 },

    #[error("empty feasible range: a_other^2 = {used:e} exceeds budget {budget:e}")]
    EmptyRange { used: f64, budget: f64 },

    #[error("surface-BS channel entry {element} is zero")]
    SingularChannel { element: usize },

    #[error("singular system in {0}")]
    Singular(String),

    #[error("noise covariance is not positive definite")]
    NotPositiveDefinite,

    #[error("degenerate mode: no {0} amplification available")]
    Degenerate(Side),

    #[error("unknown scheme tag `{0}`")]
    UnknownScheme(String),

    #[error("unknown user index {0}")]
    UnknownUser(usize),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config file: {0}")]
    ConfigFile(String),

    #[error("empty result")]
    EmptyResult,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable category, used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) | Error::ConfigFile(_) => "config",
            Error::Dimension(_) => "dimension",
            Error::Infeasible { .. } | Error::EmptyRange { .. } => "infeasible",
            Error::SingularChannel { .. } | Error::Singular(_) | Error::NotPositiveDefinite => {
                "singular"
            }
            Error::Degenerate(_) => "degenerate",
            Error::UnknownScheme(_) | Error::UnknownUser(_) => "input",
            Error::Parse { .. } => "parse",
            Error::EmptyResult => "empty",
            Error::Io(_) => "io",
        }
    }
}

fn join(v: &[Violation]) -> String {
    v.iter()
        .map(|x| format!("{}: {x}", x.field))
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
