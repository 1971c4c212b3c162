//! Experiment harness and file formats for the `gdnn` command-line tool.

pub mod experiments;
pub mod io;
