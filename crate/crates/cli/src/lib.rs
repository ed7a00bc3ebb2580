//! Configuration, pipelines and artifact files behind the `hamsys` binary.

pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;

pub use config::{Overrides, RunConfig};
pub use error::{CliError, Result};
pub use pipeline::{RunManifest, MANIFEST};
