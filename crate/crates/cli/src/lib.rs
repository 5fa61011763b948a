//! Command-line front end for the platoon offloading simulator.

pub mod commands;
pub mod error;
pub mod settings;

pub use error::{CliError, CliResult};
pub use settings::Settings;
