use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain [{lo}, {hi}]")]
    Domain {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("instance failed validation:\n{0}")]
    Validation(ValidationReport),

    #[error("degenerate domain: downlink capacity bound M_hi = {m_hi} is not positive")]
    DegenerateDomain { m_hi: f64 },

    #[error("grid of {requested} candidates exceeds the budget of {budget}")]
    Budget { requested: u128, budget: u128 },

    #[error("invalid sweep: {0}")]
    Sweep(String),

    #[error("malformed instance: {0}")]
    Schema(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, lo: f64, hi: f64) -> Self {
        Error::Domain {
            name,
            value,
            lo,
            hi,
        }
    }
}

/// One structural assumption an instance fails to satisfy.
#[derive(Debug, Clone, PartialEq)]
pub enum Issue {
    EmptyLevelSet,
    NonpositiveParam {
        name: &'static str,
        value: f64,
    },
    NonpositiveLevel {
        level: usize,
        q: f64,
    },
    DuplicateLevel {
        first: usize,
        second: usize,
        q: f64,
    },
    /// `g_j` is not concave; `at` is the offending abscissa.
    ConcavityViolation {
        level: usize,
        at: f64,
        excess: f64,
    },
    /// `g_j` leaves `[0, 1]`.
    RangeViolation {
        level: usize,
        at: f64,
        value: f64,
    },
    /// `phi` fails to be strictly increasing near `at`.
    MonotonicityViolation {
        at: f64,
    },
    FusionRange {
        map_pre: f64,
    },
    InvalidCurve {
        level: Option<usize>,
        reason: String,
    },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::EmptyLevelSet => write!(f, "EmptyLevelSet: no quantization levels given"),
            Issue::NonpositiveParam { name, value } => {
                write!(f, "NonpositiveParam: {name} = {value} must be strictly positive")
            }
            Issue::NonpositiveLevel { level, q } => {
                write!(f, "NonpositiveParam: level {level} has q = {q}")
            }
            Issue::DuplicateLevel { first, second, q } => {
                write!(f, "DuplicateLevel: levels {first} and {second} share q = {q}")
            }
            Issue::ConcavityViolation { level, at, excess } => write!(
                f,
                "ConcavityViolation: level {level} is not concave near rho = {at} (excess {excess:e})"
            ),
            Issue::RangeViolation { level, at, value } => write!(
                f,
                "RangeViolation: level {level} has g({at}) = {value}, outside [0, 1]"
            ),
            Issue::MonotonicityViolation { at } => write!(
                f,
                "MonotonicityViolation: phi is not strictly increasing near u = {at}"
            ),
            Issue::FusionRange { map_pre } => {
                write!(f, "FusionRange: mAP_pre = {map_pre} must lie in [0, 1]")
            }
            Issue::InvalidCurve { level: Some(l), reason } => {
                write!(f, "InvalidCurve: level {l}: {reason}")
            }
            Issue::InvalidCurve { level: None, reason } => write!(f, "InvalidCurve: phi: {reason}"),
        }
    }
}

/// Every issue found while validating an instance.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "  - {issue}")?;
        }
        Ok(())
    }
}
