//! Bulk-synchronous parallel execution over a node-cut partition.

pub mod plan;
pub mod runtime;
pub mod timing;
mod worker;

pub use plan::{plan_exchange, Contribution, ExchangePlan, WorkerPlan};
pub use runtime::{spmd_run, Backend, SpmdOutput};
pub use timing::{efficiency, replay, speedup, TimingReport, WorkerClock, WorkerTiming};
