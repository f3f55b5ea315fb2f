use std::fmt;

use thiserror::Error;

/// A violated model invariant, named by the offending field.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Violation {
    pub field: String,
    pub constraint: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, constraint: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            constraint: constraint.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.constraint)
    }
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation failed: {}", join(.0))]
    Validation(Vec<Violation>),

    #[error("C({n_files},{cache_size}) = {count} combinations exceeds the enumeration cap of {cap}; supply a sparse caching distribution instead")]
    TooManyCombinations {
        n_files: usize,
        cache_size: usize,
        count: u128,
        cap: usize,
    },

    #[error("file {file} is never cached (T_n = 0)")]
    UncachedFile { file: usize },

    #[error("quadrature did not converge after {subdivisions} subdivisions: value {value:e}, error estimate {error_estimate:e}")]
    Quadrature {
        value: f64,
        error_estimate: f64,
        subdivisions: usize,
    },

    #[error("load p.m.f. of file {file} sums to {sum} (expected 1 within 1e-9)")]
    Normalization { file: usize, sum: f64 },

    #[error("{0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
