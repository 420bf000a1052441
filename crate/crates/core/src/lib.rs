//! Discrete-time simulator of a single LTE downlink cell.
//!
//! Users move through a circular cell over a time-correlated fading channel
//! and report quantized CQI through a delayed, periodically blanked feedback
//! link. The eNB schedules PRBs every TTI with frequency-domain proportional
//! fair, M-LWDF, or an alternation of the two on even and odd TTIs; the
//! alternating scheduler restores current CQI with per-(user, PRB) Kalman
//! filters. Runs report system throughput and packet loss ratio.

pub mod channel;
pub mod cli;
pub mod config;
pub mod cqi;
pub mod engine;
pub mod kalman;
pub mod metrics;
pub mod rng;
pub mod schedulers;
pub mod sweep;
pub mod traffic;
pub mod world;

pub use config::{ConfigError, LinkModel, SchedulerKind, SimConfig};
pub use engine::{run, SimError, SimRun, SummaryRow, SUMMARY_HEADER, TRACE_HEADER};
pub use sweep::{run_sweep, SweepRow, SweepSpec};
