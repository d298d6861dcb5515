//! Budget-constrained telemetry collection with dynamic cluster summaries.
//!
//! Local nodes decide each step whether to push their utilization vector to
//! a central controller (a virtual-queue controller keeps the long-run send
//! rate at the budget). The controller clusters its possibly stale view into
//! `K` groups, keeps labels stable across steps via maximum-weight matching,
//! forecasts one time series per cluster centroid and reconstructs per-node
//! forecasts as centroid plus a clamped per-node offset.
//!
//! The [`pipeline`] module wires everything into a replay simulator that
//! scores each stage against ground truth.

pub mod cli;
pub mod clustering;
pub mod error;
pub mod evaluation;
pub mod forecasting;
pub mod pipeline;
pub mod trace;
pub mod transmission;

mod fmt;

pub use error::{Error, Result};

/// Version string written into run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
