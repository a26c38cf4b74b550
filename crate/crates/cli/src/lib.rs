//! Command-line front end: matrix files, single-pair analysis, example
//! generation, exclusion certificates and the property suite.

#![forbid(unsafe_code)]

pub mod app;
pub mod certificate;
pub mod commands;
pub mod error;
pub mod matrix_file;
pub mod report;
pub mod suite;

pub use app::{run, Outcome};
pub use error::{CliError, CliResult};
pub use matrix_file::MatrixFile;
