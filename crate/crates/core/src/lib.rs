//! Simulation and verification lab for two-step Thompson sampling on bandits
//! with metric action spaces.
//!
//! * [`nets`]: epsilon-nets, nested quantization chains, covering bounds.
//! * [`env`]: linear-Gaussian and finite bandit environments.
//! * [`inference`]: conjugate Gaussian and tabular posteriors.
//! * [`agent`] / [`harness`]: batched Thompson sampling and Monte-Carlo
//!   estimation of Bayesian regret.
//! * [`bounds`]: closed-form and semi-empirical regret bounds.
//! * [`info`]: exact enumeration of mutual informations, the two-point
//!   reduction, the per-level sampling functions and chain-link ratios.

// NaN-rejecting guards are written as `!(x >= 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agent;
pub mod bounds;
pub mod env;
pub mod error;
pub mod harness;
pub mod inference;
pub mod info;
pub mod nets;
pub mod quad;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
