//! Multi-agent tabular reinforcement learning for radio target localization
//! in an indoor grid world.
//!
//! Each agent learns a model-free Q table, a Pavlovian state value that
//! biases action selection near gates and GPS-denied ground, and optionally a
//! Dyna-Q model whose planned values are blended with the model-free ones by
//! a reliability-based arbitrator. An internal motivation signal built from
//! battery and elapsed time penalizes rewards and sharpens the softmax.
//! Episodes end when the position error bound of the cooperative range
//! measurements drops below a threshold.
//!
//! Start with [`harness::run_training`] or [`harness::Simulation`]; the
//! remaining modules expose the individual models.

// `!(x > 0.0)` is how validation rejects NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gridworld;
pub mod harness;
pub mod learners;
pub mod localization;
pub mod maze;
pub mod planner;
pub mod radio;
pub mod rewards;

pub use error::{ConfigError, Error, MapError, Result};
pub use gridworld::{Action, Cell, GridMap};
pub use harness::{ExperimentConfig, Variant};
