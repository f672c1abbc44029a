use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Dataset;

/// Outcome queried by an estimator: the probability of an explicit level,
/// or the mean of a numeric (score) column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Level { column: String, level: String },
    Mean { column: String },
}

impl Outcome {
    pub fn level(column: &str, level: &str) -> Self {
        Outcome::Level {
            column: column.to_string(),
            level: level.to_string(),
        }
    }

    pub fn mean(column: &str) -> Self {
        Outcome::Mean {
            column: column.to_string(),
        }
    }

    pub fn column(&self) -> &str {
        match self {
            Outcome::Level { column, .. } | Outcome::Mean { column } => column,
        }
    }

    /// Parses `col=level`.
    pub fn parse(spec: &str) -> Result<Self> {
        match spec.split_once('=') {
            Some((c, l)) if !c.is_empty() && !l.is_empty() => Ok(Outcome::level(c, l)),
            _ => Err(Error::Parameter(format!(
                "outcome must be given as column=level, got `{spec}`"
            ))),
        }
    }

    pub(crate) fn resolve(&self, data: &Dataset) -> Result<ResolvedOutcome> {
        let column = data.require_column(self.column())?;
        match self {
            Outcome::Level { level, .. } => {
                let code = data.level_code(column, level);
                let per_level = (0..data.levels(column).len())
                    .map(|c| if Some(c as u32) == code { 1.0 } else { 0.0 })
                    .collect();
                Ok(ResolvedOutcome {
                    column,
                    per_level,
                    degenerate: code.is_none(),
                    categories: data.levels(column).len(),
                })
            }
            Outcome::Mean { .. } => Ok(ResolvedOutcome {
                column,
                per_level: data.numeric_levels(column)?,
                degenerate: false,
                categories: 0,
            }),
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Level { column, level } => write!(f, "{column}={level}"),
            Outcome::Mean { column } => write!(f, "E[{column}]"),
        }
    }
}

/// Outcome bound to a dataset: a numeric value for every level code.
#[derive(Debug, Clone)]
pub(crate) struct ResolvedOutcome {
    pub column: usize,
    pub per_level: Vec<f64>,
    pub degenerate: bool,
    /// Number of outcome categories (0 for mean outcomes).
    pub categories: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_col_level() {
        assert_eq!(Outcome::parse("y=1").unwrap(), Outcome::level("y", "1"));
        assert!(Outcome::parse("y").is_err());
        assert!(Outcome::parse("=1").is_err());
        assert_eq!(Outcome::level("y", "1").to_string(), "y=1");
    }
}
