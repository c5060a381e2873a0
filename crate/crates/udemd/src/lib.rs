//! File formats, experiment drivers and the `udemd` command-line tool built
//! on [`udemd_core`].

pub mod cli;
mod error;
pub mod experiments;
pub mod io;
pub mod manifest;

pub use error::{Error, Result};
pub use manifest::RunManifest;
