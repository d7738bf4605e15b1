//! Electric bus scheduling.
//!
//! Trips are first chained into depot-to-depot blocks by a min-cost flow
//! ([`sdvsp`]). Blocks are then chained into vehicle runs subject to battery
//! range and charging limits, solved exactly ([`bcp`]), greedily
//! ([`greedy`]) or by divide and conquer ([`dac`]). [`metrics`] turns the
//! result into fleet and efficiency figures.
//!
//! Time and energy share one unit: seconds, with energy measured as seconds
//! of driving range.

pub mod bcp;
pub mod dac;
pub mod error;
pub mod greedy;
pub mod mcf;
pub mod metrics;
pub mod schedule_data;
pub mod sdvsp;
pub mod synth;

pub use error::{BcpError, DataError, MetricsError};
