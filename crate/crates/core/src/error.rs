use std::fmt;

use thiserror::Error;

/// Which family of constraint rows an infeasibility was traced to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    Velocity,
    Acceleration,
    Torque,
    Jerk,
}

impl RowKind {
    /// Derivative order of the constraint (1 for velocity, 3 for jerk).
    pub fn order(self) -> u8 {
        match self {
            RowKind::Velocity => 1,
            RowKind::Acceleration | RowKind::Torque => 2,
            RowKind::Jerk => 3,
        }
    }
}

impl fmt::Display for RowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            RowKind::Velocity => "velocity",
            RowKind::Acceleration => "acceleration",
            RowKind::Torque => "torque",
            RowKind::Jerk => "jerk",
        };
        f.write_str(name)
    }
}

/// Location of an infeasibility on the path grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Infeasibility {
    pub kind: Option<RowKind>,
    pub k: usize,
    pub joint: Option<usize>,
    pub detail: String,
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at k={}", self.k)?;
        if let Some(kind) = self.kind {
            write!(f, " ({kind} rows)")?;
        }
        if let Some(j) = self.joint {
            write!(f, " joint {j}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("infeasible {0}")]
    Infeasible(Infeasibility),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Invalid(format!("{what} contains non-finite entries")))
    }
}
