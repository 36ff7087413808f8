//! Multivariate multi-armed bandit toolkit.
//!
//! The arm space is the Cartesian product of `D` dimensions with `N_d`
//! discrete choices each. Rewards are binary. Posterior state lives in a
//! sparse [`store::StateStore`] keyed by unordered partial assignments, and
//! arms are selected by Thompson-Sampling path-planning policies
//! ([`policies`]): full sequential passes, partial (order-m) passes, hill
//! climbing, and boosted hill climbing, plus flat Thompson Sampling and
//! per-dimension independent bandits as baselines.
//!
//! The [`simulator`] module provides a probit ground-truth reward model with
//! m-way interaction weights, [`metrics`] computes regret/convergence series
//! over closed-loop histories, [`ope`] evaluates policies on uniformly logged
//! data via the replay method with James-Stein-shrunk arm values, and
//! [`harness`] wires everything into seeded, reproducible experiments.

pub mod error;
pub mod harness;
pub mod metrics;
pub mod ope;
pub mod policies;
pub mod rng;
pub mod simulator;
pub mod store;
pub mod types;

pub use error::Error;
pub use rng::PolicyRng;
pub use store::StateStore;
pub use types::{BetaCounts, DimensionSpec, Layout, PartialAssignment, Prior, RewardRecord};

/// Shorthand result type used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
