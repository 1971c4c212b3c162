//! Reading cones, matrices and JSON inputs; writing outputs.

use gdnn_core::jordan::{Block, ConeSpec};
use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("bad cone `{0}` (expected e.g. `nonneg:1,soc:3,psd:2` or a JSON file)")]
    Cone(String),
    #[error("{0}: matrix rows must be non-empty, equal length and finite")]
    Matrix(String),
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read { path: name.clone(), source })?;
    serde_json::from_str(&text).map_err(|source| IoError::Json { path: name, source })
}

/// A JSON file holding `{"blocks": [...]}`, or a list like `nonneg:1,soc:3`.
pub fn parse_cone(arg: &str) -> Result<ConeSpec, IoError> {
    let path = Path::new(arg);
    if path.is_file() {
        return read_json(path);
    }
    let mut blocks = Vec::new();
    for part in arg.split(',') {
        let (kind, dim) = part.trim().split_once(':').ok_or_else(|| IoError::Cone(arg.into()))?;
        let dim: usize = dim.trim().parse().map_err(|_| IoError::Cone(arg.into()))?;
        blocks.push(match kind.trim() {
            "nonneg" | "r" => Block::Nonneg { dim },
            "soc" | "l" => Block::SecondOrder { dim },
            "psd" | "s" => Block::PsdVec { order: dim },
            _ => return Err(IoError::Cone(arg.into())),
        });
    }
    if blocks.is_empty() || blocks.iter().any(|b| b.dim() == 0) {
        return Err(IoError::Cone(arg.into()));
    }
    Ok(ConeSpec::new(blocks))
}

/// A JSON array of rows.
pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>, IoError> {
    let rows: Vec<Vec<f64>> = read_json(path)?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != rows[0].len() || r.iter().any(|v| !v.is_finite())) {
        return Err(IoError::Matrix(path.display().to_string()));
    }
    Ok(DMatrix::from_fn(n, rows[0].len(), |i, j| rows[i][j]))
}

pub fn matrix_json(m: &DMatrix<f64>) -> serde_json::Value {
    let rows: Vec<Vec<f64>> = (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
    serde_json::json!(rows)
}

/// Write to `out`, or print to stdout.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), IoError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|source| IoError::Write { path: p.display().to_string(), source }),
        None => {
            println!("{}", text.trim_end());
            Ok(())
        }
    }
}
