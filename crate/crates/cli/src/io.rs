//! On-disk formats: the system file, gain files, and weight specs given on
//! the command line.

use serde::{Deserialize, Serialize};
use sofkit_core::care::{LinearSystem, SystemMode, Weights};
use sofkit_core::matrix::Matrix;
use std::path::Path;

use crate::CliError;

/// The system file as stored on disk. Dimensions are declared explicitly so
/// shape mistakes produce errors naming the offending field.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemFile {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
    #[serde(rename = "D", skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<Vec<f64>>>,
    #[serde(rename = "Q", skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Vec<f64>>>,
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<Vec<f64>>>,
}

fn to_matrix(field: &str, rows: &[Vec<f64>], nr: usize, nc: usize) -> Result<Matrix<f64>, CliError> {
    if rows.len() != nr || rows.iter().any(|r| r.len() != nc) {
        return Err(CliError::input(format!(
            "field \"{field}\": expected a {nr}x{nc} matrix, got {}x{}",
            rows.len(),
            rows.first().map_or(0, |r| r.len())
        )));
    }
    Matrix::from_rows(rows).map_err(|e| CliError::input(format!("field \"{field}\": {e}")))
}

pub fn matrix_to_rows(m: &Matrix<f64>) -> Vec<Vec<f64>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect())
        .collect()
}

impl SystemFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text)
            .map_err(|e| CliError::input(format!("system file parse error: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn mode(&self) -> Result<SystemMode, CliError> {
        match self.mode.as_deref() {
            Some("measurement-disturbance") => Ok(SystemMode::MeasurementDisturbance),
            Some("direct-feedthrough") => Ok(SystemMode::DirectFeedthrough),
            Some("no-d") => Ok(SystemMode::NoD),
            Some(other) => Err(CliError::input(format!(
                "field \"mode\": unknown value {other:?} (expected measurement-disturbance, direct-feedthrough, or no-d)"
            ))),
            // D omitted means no disturbance feedthrough at all
            None if self.d.is_none() => Ok(SystemMode::NoD),
            None => Ok(SystemMode::MeasurementDisturbance),
        }
    }

    pub fn to_system(&self) -> Result<LinearSystem<f64>, CliError> {
        let mode = self.mode()?;
        let a = to_matrix("A", &self.a, self.n, self.n)?;
        let b = to_matrix("B", &self.b, self.n, self.m)?;
        let c = to_matrix("C", &self.c, self.p, self.n)?;
        let d = match (&self.d, mode) {
            (None, SystemMode::NoD) => None,
            (None, _) => {
                return Err(CliError::input(format!(
                    "field \"D\": required for mode {mode:?}"
                )))
            }
            (Some(_), SystemMode::NoD) => {
                return Err(CliError::input(
                    "field \"D\": present but mode is no-d".into(),
                ))
            }
            (Some(rows), SystemMode::DirectFeedthrough) => {
                Some(to_matrix("D", rows, self.p, self.m)?)
            }
            (Some(rows), SystemMode::MeasurementDisturbance) => {
                let cols = rows.first().map_or(0, |r| r.len());
                Some(to_matrix("D", rows, self.p, cols)?)
            }
        };
        LinearSystem::new(a, b, c, d, mode).map_err(|e| CliError::input(e.to_string()))
    }

    /// Q/R from the file, if both are present.
    pub fn weights(&self) -> Result<Option<Weights<f64>>, CliError> {
        match (&self.q, &self.r) {
            (Some(q), Some(r)) => {
                let q = to_matrix("Q", q, self.n, self.n)?;
                let r = to_matrix("R", r, self.m, self.m)?;
                Ok(Some(
                    Weights::new(q, r).map_err(|e| CliError::input(e.to_string()))?,
                ))
            }
            (None, None) => Ok(None),
            (Some(_), None) => Err(CliError::input("field \"R\": missing (Q given)".into())),
            (None, Some(_)) => Err(CliError::input("field \"Q\": missing (R given)".into())),
        }
    }
}

/// A weight given as `identity`, `diag:v1,v2,...`, or a path to a file
/// holding a nested array (optionally wrapped as {"Q": ...} etc.).
pub fn parse_weight(spec: &str, dim: usize, name: &str) -> Result<Matrix<f64>, CliError> {
    if spec == "identity" {
        return Ok(Matrix::identity(dim));
    }
    if let Some(rest) = spec.strip_prefix("diag:") {
        let vals: Result<Vec<f64>, _> = rest.split(',').map(|s| s.trim().parse()).collect();
        let vals = vals
            .map_err(|e| CliError::input(format!("--{name} diag values: {e}")))?;
        if vals.len() != dim {
            return Err(CliError::input(format!(
                "--{name}: diag needs {dim} values, got {}",
                vals.len()
            )));
        }
        return Ok(Matrix::diag(&vals));
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| CliError::input(format!("--{name}: cannot read {spec}: {e}")))?;
    let rows: Vec<Vec<f64>> = serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("--{name}: parse error in {spec}: {e}")))?;
    to_matrix(name, &rows, dim, dim)
}

/// Resolve weights from flags (taking precedence) or the system file.
pub fn resolve_weights(
    file: &SystemFile,
    q_flag: Option<&str>,
    r_flag: Option<&str>,
) -> Result<Weights<f64>, CliError> {
    let from_file = file.weights()?;
    let q = match q_flag {
        Some(spec) => parse_weight(spec, file.n, "Q")?,
        None => match &from_file {
            Some(w) => w.q.clone(),
            None => return Err(CliError::input("no Q: give --Q or put it in the system file".into())),
        },
    };
    let r = match r_flag {
        Some(spec) => parse_weight(spec, file.m, "R")?,
        None => match &from_file {
            Some(w) => w.r.clone(),
            None => return Err(CliError::input("no R: give --R or put it in the system file".into())),
        },
    };
    Weights::new(q, r).map_err(|e| CliError::input(e.to_string()))
}

/// Gain file: either `{"F": [[...]]}` or a bare nested array.
pub fn load_gain(path: &Path, m: usize, p: usize) -> Result<Matrix<f64>, CliError> {
    #[derive(Deserialize)]
    struct GainFile {
        #[serde(rename = "F")]
        f: Vec<Vec<f64>>,
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let rows = if let Ok(g) = serde_json::from_str::<GainFile>(&text) {
        g.f
    } else {
        serde_json::from_str::<Vec<Vec<f64>>>(&text)
            .map_err(|e| CliError::input(format!("gain file parse error: {e}")))?
    };
    to_matrix("F", &rows, m, p)
}
