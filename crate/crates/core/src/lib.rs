//! Regret simulation against stateful reference policies under bandit feedback.
//!
//! - [`game`]: reward tables, finite-state policies, rollouts and regret.
//! - [`repetition`]: block averages, d-sampling, variability and the
//!   string that defeats local repetition.
//! - [`hidden_bandit`]: the two-armed stay/switch environment.
//! - [`players`]: hidden-bandit strategies.
//! - [`adversaries`]: reward processes and constant adversaries.
//! - [`bridge`]: reductions between policies and the hidden bandit.
//! - [`experiment`]: config-driven seeded runs and reports.
//! - [`policy_file`]: the text format for policy sets.
//! - [`rng`]: keyed random streams.

pub mod adversaries;
pub mod bridge;
pub mod error;
pub mod experiment;
pub mod game;
pub mod hidden_bandit;
pub mod players;
pub mod policy_file;
pub mod repetition;
pub mod rng;

pub use error::{Error, Result};
