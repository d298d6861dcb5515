//! The replay simulator: per step, node transmissions, stored-view update,
//! clustering and forecasting, then scoring against the trace.

mod config;
mod monitor;
mod output;
mod run;
mod sweep;
mod view;

pub use config::{parse_horizons, ClusterMode, ClusteringKind, ExperimentConfig, TransmitterKind};
pub use monitor::{monitor_mode, MonitorChannel, MonitorReport, MonitorSelection};
pub use output::{manifest_text, write_correlation_cdf, write_monitor, write_run, write_sweep};
pub use run::{
    run, run_with_registry, AggregateMetrics, AggregateRow, AssignmentRow, ForecastRow, RunOutput, ALL_RESOURCES,
};
pub use sweep::{sweep, SweepAxis, SweepPoint};
pub use view::StoredView;

/// SplitMix64 of `a ^ rotated b`: independent RNG streams per component.
pub(crate) fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.rotate_left(32) ^ 0x9E37_79B9_7F4A_7C15;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
