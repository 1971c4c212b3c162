//! JSON interchange for [`BlockConicProgram`].
//!
//! ```text
//! {
//!   "c": [..], "b": [..], "h": [..],
//!   "a": {"rows": m, "cols": n, "entries": [[i, j, v], ..]},
//!   "g": {"rows": k, "cols": n, "entries": [[i, j, v], ..]},
//!   "cone": {"blocks": [{"kind": "nonneg", "dim": 3}, {"kind": "soc", "dim": 4}, {"kind": "psd", "order": 2}]}
//! }
//! ```
//!
//! Entries are zero-based triplets; duplicates are summed. PSD blocks use the
//! `svec` layout of [`crate::jordan`].

use super::{BlockConicProgram, SolverError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed program JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] SolverError),
}

pub fn from_json(text: &str) -> Result<BlockConicProgram, FormatError> {
    let prog: BlockConicProgram = serde_json::from_str(text)?;
    prog.validate()?;
    Ok(prog)
}

pub fn to_json(prog: &BlockConicProgram) -> String {
    serde_json::to_string_pretty(prog).expect("program serializes")
}
