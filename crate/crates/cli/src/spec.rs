//! System spec files.
//!
//! ```json
//! { "dim": 2, "noise_count": 1,
//!   "drift": [[-1.0, 0.5], [0.0, -2.0]],
//!   "noise": [ [[0.3, 0.0], [0.0, 0.1]] ] }
//! ```
//!
//! `drift` lists rows; `noise[a]` is the matrix of driver `a`, so
//! `noise[a][i][j]` is the coefficient of `x_j dw^a` in `dx_i`.

use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use stochstab_core::{LinearSDESystem, ModelError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub dim: usize,
    pub noise_count: usize,
    pub drift: Vec<Vec<f64>>,
    pub noise: Vec<Vec<Vec<f64>>>,
}

/// A spec problem located by field path and, when known, source position.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct SpecError {
    pub source_name: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.source_name)?;
        if let Some(line) = self.line {
            write!(f, ":{line}")?;
            if let Some(col) = self.column {
                write!(f, ":{col}")?;
            }
        }
        write!(f, ": field `{}`: {}", self.field, self.message)
    }
}

impl SystemSpec {
    pub fn from_system(sys: &LinearSDESystem) -> Self {
        let rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
                .collect()
        };
        Self {
            dim: sys.dim,
            noise_count: sys.noise_count,
            drift: rows(&sys.drift),
            noise: sys.noise.iter().map(rows).collect(),
        }
    }

    /// Shape checks; each problem names the offending field.
    pub fn shape_problems(&self) -> Vec<(String, String)> {
        let n = self.dim;
        let mut out = Vec::new();
        if n == 0 {
            out.push(("dim".into(), "dim must be ≥ 1".into()));
            return out;
        }
        let mut check_matrix = |name: String, m: &[Vec<f64>]| {
            if m.len() != n {
                out.push((name, format!("expected {n} rows, found {}", m.len())));
                return;
            }
            for (i, row) in m.iter().enumerate() {
                if row.len() != n {
                    out.push((format!("{name}[{i}]"), format!("expected {n} entries, found {}", row.len())));
                }
            }
        };
        check_matrix("drift".into(), &self.drift);
        for (a, m) in self.noise.iter().enumerate() {
            check_matrix(format!("noise[{a}]"), m);
        }
        if self.noise.len() != self.noise_count {
            out.push((
                "noise".into(),
                format!(
                    "noise_count is {} but {} matrices are given",
                    self.noise_count,
                    self.noise.len()
                ),
            ));
        }
        out
    }

    pub fn to_system(&self) -> Result<LinearSDESystem, ModelError> {
        let n = self.dim;
        let mat = |m: &[Vec<f64>]| DMatrix::from_fn(n, n, |i, j| m[i][j]);
        LinearSDESystem::new(mat(&self.drift), self.noise.iter().map(|m| mat(m)).collect())
    }
}

/// Parses and validates a spec held in memory.
pub fn parse_system_spec(text: &str, source_name: &str) -> Result<(SystemSpec, LinearSDESystem), SpecError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let spec: SystemSpec = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        SpecError {
            source_name: source_name.into(),
            line: Some(inner.line()),
            column: Some(inner.column()),
            field: if path == "." { "<document>".into() } else { path },
            message: strip_position(&inner.to_string()),
        }
    })?;
    de.end().map_err(|e| SpecError {
        source_name: source_name.into(),
        line: Some(e.line()),
        column: Some(e.column()),
        field: "<document>".into(),
        message: strip_position(&e.to_string()),
    })?;

    let located = |field: String, message: String| SpecError {
        source_name: source_name.into(),
        line: key_line(text, &field),
        column: None,
        field,
        message,
    };
    if let Some((field, message)) = spec.shape_problems().into_iter().next() {
        return Err(located(field, message));
    }
    let sys = spec.to_system().map_err(|e| match e {
        ModelError::InvalidSystem(v) if !v.is_empty() => {
            located(v[0].field.clone(), v[0].message.clone())
        }
        other => located("<document>".into(), other.to_string()),
    })?;
    Ok((spec, sys))
}

pub fn read_system_spec(path: &Path) -> Result<(SystemSpec, LinearSDESystem), crate::CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| crate::CliError::io(path, e))?;
    Ok(parse_system_spec(&text, &path.display().to_string())?)
}

/// serde_json appends " at line L column C"; the position is reported
/// separately.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

/// Line of the first occurrence of the top-level key of `field`.
fn key_line(text: &str, field: &str) -> Option<usize> {
    let key = field.split(['[', '.']).next().filter(|k| !k.is_empty())?;
    let needle = format!("\"{key}\"");
    let offset = text.find(&needle)?;
    Some(text[..offset].matches('\n').count() + 1)
}
