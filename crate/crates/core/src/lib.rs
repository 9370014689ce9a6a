//! Exact numerical simulator and analysis toolkit for quantum-walk search on
//! backtracking trees.
//!
//! The crate runs classical backtracking on constraint satisfaction problems,
//! materializes the tree of valid partial assignments, builds the walk
//! reflection operators on the vertex basis, analyzes them through exact
//! eigendecomposition and an analytic phase-estimation acceptance model, and
//! layers detection, finding and unique-target search on top, with exact
//! operation accounting for scaling experiments.

pub mod analysis;
pub mod backtrack;
pub mod csp;
pub mod error;
pub mod search;
pub mod spectral;
pub mod statevector;
pub mod suite;
pub mod walk;

pub use error::{Error, Result};
