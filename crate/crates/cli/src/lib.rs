//! Command-line front end for `newsimpact-core`: CSV and EMB1 input,
//! embedding providers, result tables, the SVG plot and the markdown report.

pub mod config;
pub mod csvio;
pub mod emb1;
pub mod error;
pub mod fixture;
pub mod http;
pub mod pipeline;
pub mod provider;
pub mod report;
pub mod svg;

pub use config::{Mode, Overrides, ProviderKind, RunConfig};
pub use error::{Error, Result, StageError};
