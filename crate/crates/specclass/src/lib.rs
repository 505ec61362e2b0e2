//! File formats, parallel drivers, the before/after pipeline and the
//! command-line interface around `specclass-core`.

pub mod cli;
pub mod error;
pub mod io;
pub mod model;
pub mod parallel;
pub mod pipeline;
pub mod tables;

pub use error::{CliError, Result};
