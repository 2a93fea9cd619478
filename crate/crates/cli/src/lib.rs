//! Scenario runner for the `ntn-harq` scheduling model: configuration files,
//! single runs, sweeps, calibration and timing diagrams.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibrate;
pub mod config;
pub mod error;
pub mod render;
pub mod report;
pub mod scenario;
pub mod sweep;

pub use config::ScenarioConfig;
pub use error::{AppError, AppResult};
