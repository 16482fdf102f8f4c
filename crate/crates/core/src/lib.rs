//! Unsupervised selection and late fusion of retrieval rankers.
//!
//! A ranker is judged by the hyperedge weights of a log-based hypergraph
//! built on its own ranked lists, pairs of rankers are scored from those
//! estimates and their rank-biased overlap, and the selected rankers are
//! fused by hypergraph manifold rank aggregation.
//!
//! - [`rank`]: collections, ranked lists and distance matrices
//! - [`io`]: the text and binary file formats
//! - [`hypergraph`]: incidence structure and hyperedge weights
//! - [`qpp`]: per-query and per-ranker effectiveness estimates
//! - [`correlation`]: rank-biased overlap between rankers
//! - [`selection`]: pair scoring and combination expansion
//! - [`fusion`]: affinity construction, re-ranking and multiplicative fusion
//! - [`eval`]: MAP/CMC against labels and synthetic benchmarks

pub mod correlation;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod hypergraph;
pub mod io;
mod numeric;
pub mod qpp;
pub mod rank;
pub mod selection;

pub use error::{Error, Result};
pub use numeric::{compensated_sum, mean, median};
