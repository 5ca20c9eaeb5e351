//! File formats, batch pipeline, CLI and HTTP service for workshop recordings.
//!
//! A project is a directory holding `project.json` and the source files it
//! names. The stages `ingest`, `segment`, `stats` and `export` write their
//! results under `derived/` and back into the manifest.

pub mod cli;
pub mod derived;
pub mod error;
pub mod ingest;
pub mod pipeline;
pub mod project;
pub mod providers;
pub mod report;
pub mod service;

pub use error::{Error, Result};
pub use pipeline::Workspace;
pub use project::{load_project, save_project};
