//! Numerical core for measuring how news topics move stock returns.
//!
//! Headlines are embedded, clustered into topics with k-means (silhouette
//! picks the number of topics), turned into daily topic exposures, and
//! regressed against returns with ordinary least squares. A collapsed Gibbs
//! LDA sampler provides keyword-level topic descriptions.
//!
//! The crate is `no_std` and only needs `alloc`; file formats, HTTP and the
//! command line live in the `newsimpact` crate.

#![no_std]

extern crate alloc;

pub mod analysis;
pub mod cluster;
pub mod corpus;
pub mod embed;
mod error;
pub mod lda;
pub mod linalg;
pub mod statfn;
pub mod text;

pub use error::{Error, Result};
