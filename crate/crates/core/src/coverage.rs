use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// The insurer's coverage function `r(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoveragePolicy {
    /// No insurance.
    Zero,
    /// `r(x) = level * x`.
    Linear { level: f64 },
    /// Pays `low_level * x` when `x <= cutoff`, `high_level * x` when `x > cutoff`.
    Threshold {
        cutoff: f64,
        low_level: f64,
        high_level: f64,
    },
}

impl CoveragePolicy {
    pub fn linear(level: f64) -> Result<Self, Error> {
        Self::Linear { level }.validated()
    }

    pub fn threshold(cutoff: f64, low_level: f64, high_level: f64) -> Result<Self, Error> {
        Self::Threshold {
            cutoff,
            low_level,
            high_level,
        }
        .validated()
    }

    /// Rejects levels outside `[0, 1]` and non-finite parameters.
    pub fn validated(self) -> Result<Self, Error> {
        let level_ok = |r: f64| r.is_finite() && (0.0..=1.0).contains(&r);
        match self {
            Self::Zero => Ok(self),
            Self::Linear { level } if level_ok(level) => Ok(self),
            Self::Threshold {
                cutoff,
                low_level,
                high_level,
            } if cutoff.is_finite() && level_ok(low_level) && level_ok(high_level) => Ok(self),
            _ => Err(Error::InvalidArgument(format!(
                "coverage levels must lie in [0, 1]: {self}"
            ))),
        }
    }

    /// Coverage paid on a direct loss `loss >= 0`.
    pub fn apply(&self, loss: f64) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::Linear { level } => level * loss,
            Self::Threshold {
                cutoff,
                low_level,
                high_level,
            } => {
                if loss > cutoff {
                    high_level * loss
                } else {
                    low_level * loss
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Self::Zero => true,
            Self::Linear { level } => level == 0.0,
            Self::Threshold {
                low_level,
                high_level,
                ..
            } => low_level == 0.0 && high_level == 0.0,
        }
    }
}

impl fmt::Display for CoveragePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "none"),
            Self::Linear { level } => write!(f, "linear:{level}"),
            Self::Threshold {
                cutoff,
                low_level,
                high_level,
            } => write!(f, "threshold:{cutoff},{low_level},{high_level}"),
        }
    }
}

/// Parses `none`, `linear:R` or `threshold:XR,R0,R1`.
impl FromStr for CoveragePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::InvalidArgument(format!("unrecognized coverage spec '{s}'"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let s = s.trim();
        if s == "none" {
            return Ok(Self::Zero);
        }
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "linear" => Self::linear(num(rest)?),
            "threshold" => {
                let parts: Vec<&str> = rest.split(',').collect();
                if parts.len() != 3 {
                    return Err(bad());
                }
                Self::threshold(num(parts[0])?, num(parts[1])?, num(parts[2])?)
            }
            _ => Err(bad()),
        }
    }
}
