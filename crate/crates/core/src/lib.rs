//! Stochastic block models for bipartite networks.
//!
//! The crate fits the bipartite SBM (with or without degree correction) and
//! the ordinary unipartite SBM by maximizing their profile log-likelihoods,
//! samples synthetic networks from planted models, and runs the benchmark
//! experiments that compare the two.

pub mod bench;
pub mod cli;
pub mod error;
pub mod genmodel;
pub mod graph;
pub mod inference;
pub mod io;
pub mod metrics;

pub use error::{Error, Result};
