//! Block chaining under battery, recharge and next-day operability limits.
//!
//! Energy is measured in seconds of driving range throughout. A block `i`
//! draws `B_i` seconds of charge; idle depot time between two blocks of the
//! same day recharges at `rate_day` seconds of range per second, and the
//! overnight gap between a run's last block and the next day's first block
//! recharges at `rate_night`.

mod exact;
mod lp;
mod overnight;
mod profile;
mod relax;
mod solution;
mod validate;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::BcpError;
use crate::sdvsp::Block;

pub use exact::{solve_exact, solve_exact_with, ExactConfig, ExactOutcome, DEFAULT_EXACT_BLOCK_LIMIT};
pub use lp::{write_lp, write_lp_file};
pub use relax::chain_without_battery;
pub use solution::{ArcKey, ChainSolution, Node, OvernightLink, PartitionSummary};
pub use validate::{replay_next_day, validate, ValidationReport, Violation};

pub(crate) use overnight::{plan_next_day, NextDayPlan};
pub(crate) use profile::RunProfile;
pub(crate) use solution::assemble;

/// Absolute tolerance, in seconds, for every charge and SOC comparison.
pub const TOLERANCE: f64 = 1e-6;

/// Battery, charging and cost parameters of the chaining model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    /// Battery capacity in seconds of driving.
    pub battery_cap: f64,
    /// Range gained per second of daytime (fast) charging.
    pub rate_day: f64,
    /// Range gained per second of overnight (slow) charging.
    pub rate_night: f64,
    /// Horizon length in seconds.
    pub horizon: i64,
    /// Cost of one vehicle, in seconds.
    pub vehicle_cost: f64,
    /// Weight on daytime depot layover.
    pub layover_weight: f64,
    /// Minimum depot layover between consecutive blocks.
    pub layover_min: i64,
    /// Maximum depot layover; `None` leaves it unbounded.
    pub layover_max: Option<i64>,
    /// Fast charger power, kW.
    pub power_day: f64,
    /// Slow charger power, kW.
    pub power_night: f64,
    /// Vehicle energy draw while driving, kW.
    pub consumption_rate: f64,
    /// Battery size in kWh.
    pub battery_kwh: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        EnergyParams::from_powers(7200.0, 450.0, 125.0, 220.0)
    }
}

impl EnergyParams {
    /// Derives recharge rates and battery size from charger powers and the
    /// vehicle's consumption rate. Remaining fields take the baseline values
    /// (24 h horizon, vehicle cost 50 000 s, layover weight 1, L = 0, U open).
    pub fn from_powers(
        battery_cap: f64,
        power_day: f64,
        power_night: f64,
        consumption_rate: f64,
    ) -> Self {
        EnergyParams {
            battery_cap,
            rate_day: power_day / consumption_rate,
            rate_night: power_night / consumption_rate,
            horizon: 86_400,
            vehicle_cost: 50_000.0,
            layover_weight: 1.0,
            layover_min: 0,
            layover_max: None,
            power_day,
            power_night,
            consumption_rate,
            battery_kwh: consumption_rate * battery_cap / 3600.0,
        }
    }

    /// Replaces the battery capacity and keeps `battery_kwh` consistent.
    pub fn with_battery_cap(mut self, battery_cap: f64) -> Self {
        self.battery_cap = battery_cap;
        self.battery_kwh = self.consumption_rate * battery_cap / 3600.0;
        self
    }

    pub fn check(&self) -> Result<(), BcpError> {
        let bad = |m: &str| Err(BcpError::InvalidParams(m.to_string()));
        if !(self.battery_cap > 0.0) || !self.battery_cap.is_finite() {
            return bad("battery capacity must be positive and finite");
        }
        if !(self.rate_night > 0.0) {
            return bad("overnight recharge rate must be positive");
        }
        if self.rate_day < self.rate_night {
            return bad("daytime recharge rate must not be below the overnight rate");
        }
        if self.horizon <= 0 {
            return bad("horizon must be positive");
        }
        if self.layover_min < 0 {
            return bad("minimum layover must be non-negative");
        }
        if let Some(u) = self.layover_max {
            if u < self.layover_min {
                return bad("minimum layover exceeds maximum layover");
            }
        }
        if self.vehicle_cost < 0.0 || self.layover_weight < 0.0 {
            return bad("costs must be non-negative");
        }
        Ok(())
    }

    fn layover_ok(&self, gap: i64) -> bool {
        gap >= self.layover_min && self.layover_max.is_none_or(|u| gap <= u)
    }
}

/// Blocks plus energy parameters. Day and night arc sets are implicit and
/// answered by closed-form membership tests.
#[derive(Debug, Clone, PartialEq)]
pub struct BcpInstance {
    /// Sorted by (start time, id).
    blocks: Vec<Block>,
    index: HashMap<u32, usize>,
    pub params: EnergyParams,
    pub big_m1: f64,
    pub big_m2: f64,
}

/// Checks parameters and block ranges, then builds the instance.
///
/// Blocks longer than the battery range must be routed to the diesel pool
/// before calling this.
pub fn build_instance(blocks: Vec<Block>, params: EnergyParams) -> Result<BcpInstance, BcpError> {
    params.check()?;
    let mut blocks = blocks;
    blocks.sort_by_key(|b| (b.start_time, b.id));
    let mut index = HashMap::with_capacity(blocks.len());
    for (k, b) in blocks.iter().enumerate() {
        if index.insert(b.id, k).is_some() {
            return Err(BcpError::DuplicateBlock(b.id));
        }
        if b.consumption as f64 > params.battery_cap {
            return Err(BcpError::BlockOutOfRange {
                block: b.id,
                consumption: b.consumption as f64,
                capacity: params.battery_cap,
            });
        }
    }
    let max_start = blocks.iter().map(|b| b.start_time).max().unwrap_or(0) as f64;
    let night = (params.horizon as f64 + max_start) * params.rate_night;
    let day = params.rate_day * max_start;
    let big_m1 = (params.battery_cap + night.max(day)).floor() + 1.0;
    let big_m2 = params.battery_cap + 2.0 * big_m1;
    Ok(BcpInstance {
        blocks,
        index,
        params,
        big_m1,
        big_m2,
    })
}

impl BcpInstance {
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block(&self, idx: usize) -> &Block {
        &self.blocks[idx]
    }

    pub fn index_of(&self, id: u32) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn start(&self, idx: usize) -> i64 {
        self.blocks[idx].start_time
    }

    pub fn end(&self, idx: usize) -> i64 {
        self.blocks[idx].end_time
    }

    pub fn consumption(&self, idx: usize) -> f64 {
        self.blocks[idx].consumption as f64
    }

    /// Depot layover between block `i` ending and block `j` starting.
    pub fn gap(&self, i: usize, j: usize) -> i64 {
        self.start(j) - self.end(i)
    }

    /// Overnight window from block `i` ending to block `j` starting on the
    /// next horizon.
    pub fn night_gap(&self, i: usize, j: usize) -> i64 {
        self.params.horizon + self.start(j) - self.end(i)
    }

    /// Membership in the same-day arc set.
    pub fn is_day_arc(&self, i: usize, j: usize) -> bool {
        i != j && self.params.layover_ok(self.gap(i, j))
    }

    /// Membership in the overnight arc set.
    pub fn is_night_arc(&self, i: usize, j: usize) -> bool {
        self.params.layover_ok(self.night_gap(i, j))
    }

    /// Largest daytime charge on arc (i, j).
    pub fn day_charge_cap(&self, i: usize, j: usize) -> f64 {
        self.gap(i, j) as f64 * self.params.rate_day
    }

    /// Overnight charge available on arc (i, j).
    pub fn night_charge(&self, i: usize, j: usize) -> f64 {
        self.night_gap(i, j) as f64 * self.params.rate_night
    }

    /// Objective contribution of a same-day arc.
    pub fn arc_cost(&self, i: usize, j: usize) -> f64 {
        self.params.layover_weight * self.gap(i, j) as f64
    }

    /// Enumerates the same-day arc set. Quadratic; meant for small instances.
    pub fn day_arcs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut arcs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.is_day_arc(i, j) {
                    arcs.push((i, j));
                }
            }
        }
        arcs
    }

    /// Enumerates the overnight arc set. Quadratic; meant for small instances.
    pub fn night_arcs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut arcs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.is_night_arc(i, j) {
                    arcs.push((i, j));
                }
            }
        }
        arcs
    }

    /// Objective value of a set of runs given as block indices.
    pub fn runs_cost(&self, runs: &[Vec<usize>]) -> f64 {
        runs.iter()
            .map(|run| {
                self.params.vehicle_cost
                    + run
                        .windows(2)
                        .map(|w| self.arc_cost(w[0], w[1]))
                        .sum::<f64>()
            })
            // Not `sum()`: an empty f64 sum is -0.0.
            .fold(0.0, |a, b| a + b)
    }

    /// Sub-instance restricted to the given block ids, with its own big-Ms.
    pub fn restrict(&self, ids: &[u32]) -> BcpInstance {
        let blocks = ids
            .iter()
            .map(|id| self.blocks[self.index[id]].clone())
            .collect();
        build_instance(blocks, self.params).expect("subset of a valid instance is valid")
    }
}
