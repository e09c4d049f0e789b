//! Differentially private answers to boolean combinations of aggregate
//! threshold queries.
//!
//! A query such as `busy AND (crowded OR late)` is built from atomic
//! queries, each returning the group-by cells whose aggregate exceeds a
//! threshold. The mechanisms here release such answers with a bound `β` on
//! the false negative rate and a bound `α` on the false positive rate while
//! spending as little privacy budget as they can, and refuse to answer once
//! `epsilon_max` would be exceeded.
//!
//! - [`query`]: atomic queries, the expression language and tree minimization.
//! - [`data`]: CSV data, predicate domains and exact ground truth.
//! - [`dp`]: seeded Laplace noise, the threshold-shift mechanism, accounting.
//! - [`apportion`]: optimal split of `β` and `α` across sub-queries.
//! - [`engine`]: the two-phase mechanism and the single-phase baseline.
//! - [`ent`]: the multi-step variant with predicate-wise accounting.
//! - [`harness`]: configs, synthetic data and Monte Carlo experiments.

pub mod apportion;
pub mod data;
pub mod dp;
pub mod engine;
pub mod ent;
pub mod error;
pub mod harness;
pub mod query;

pub use error::{Error, Result};

/// Predicate indices into a domain, ordered.
pub type PredicateSet = std::collections::BTreeSet<usize>;
