//! Subframe-granularity HARQ scheduling model for LTE-M and NB-IoT links
//! carried over LEO satellites.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: slant range and round-trip time for a given orbit and payload.
//! - [`linkbudget`]: free-space path loss and uplink SNR.
//! - [`bler`]: BLER lookup tables and repetition selection.
//! - [`harq`]: fixed and variable DD2A/UG2D delay calculus and HARQ process sizing.
//! - [`scheduler`]: subframe timelines for legacy and variable-delay scheduling,
//!   HD-FDD validation, the base-station view and a Monte Carlo goodput run.
//! - [`metrics`]: closed-form subframe utilisation, throughput and power cost.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bler;
pub mod error;
pub mod geometry;
pub mod harq;
pub mod linkbudget;
pub mod metrics;
pub mod scheduler;

pub use error::{Error, Result};
