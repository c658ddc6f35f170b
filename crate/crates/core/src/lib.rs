//! Interactive many-objective optimization over constrained configuration
//! spaces.
//!
//! The pipeline is:
//!
//! 1. [`model_io`] loads a DIMACS feature model (or a CSV of pre-evaluated
//!    candidates) and enumerates a large pool of valid configurations.
//! 2. [`preprocess`] discretizes and one-hot encodes the pool.
//! 3. [`geometry`] recursively bi-clusters the pool with FASTMAP projections.
//! 4. [`engine`] runs the two-pass search: preference-guided subtree pruning
//!    driven by an [`engine::Oracle`], then automatic SWAY pruning.
//! 5. [`baselines`] and [`evalkit`] provide the comparison optimizers and
//!    the ranking/benchmark harness.

pub mod baselines;
pub mod engine;
mod error;
pub mod evalkit;
pub mod geometry;
pub mod model_io;
pub mod preprocess;
pub mod ranking;
mod sort;

pub use error::{Error, Result};
