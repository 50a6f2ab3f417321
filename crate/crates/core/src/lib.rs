//! Karp-Sipser kernelization for maximum bipartite matching.
//!
//! The pipeline is: load a [`graph::BipartiteGraph`], reduce it with
//! [`kernel::kernelize`] (multi-vertex merging over the mergeable
//! [`store::MergeGraph`] format), solve the kernel exactly with
//! [`matching::maximum_matching`], and lift the result back with
//! [`reconstruct::reconstruct`].

pub mod error;
pub mod graph;
pub mod instances;
pub mod io;
pub mod kernel;
pub mod matching;
pub mod pipeline;
pub mod reconstruct;
pub mod store;

pub use error::{Error, Result};
