//! File formats, model loading, plotting, and the command implementations
//! behind the `lidar-cfe` binary.

pub mod commands;
pub mod error;
pub mod files;
pub mod model_spec;
pub mod plot;
pub mod results;

pub use error::{CliError, CliResult};
