//! Earliest-start greedy chaining.
//!
//! Blocks are scanned in departure order. A vehicle keeps taking the next
//! block that passes the temporal and SOC tests; when the scan runs out a new
//! vehicle opens on the earliest unassigned block. Every vehicle starts on a
//! full battery and returns to its own first block the next morning.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bcp::{assemble, BcpInstance, ChainSolution, NextDayPlan, TOLERANCE};
use crate::error::BcpError;

/// Overnight window used by the next-day test when a block is appended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OvernightWindow {
    /// From the end of the newly appended block to the vehicle's first
    /// departure on the next day.
    #[default]
    Consistent,
    /// From the end of the block being extended.
    /// Overstates the window and can yield next-day infeasible runs.
    FromExtended,
}

impl fmt::Display for OvernightWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OvernightWindow::Consistent => "consistent",
            OvernightWindow::FromExtended => "from-extended",
        })
    }
}

impl FromStr for OvernightWindow {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "consistent" => Ok(OvernightWindow::Consistent),
            "from-extended" => Ok(OvernightWindow::FromExtended),
            _ => Err(format!("unknown overnight window `{s}`")),
        }
    }
}

/// The open vehicle.
struct Vehicle {
    blocks: Vec<usize>,
    /// SOC at the start of the last block.
    soc: f64,
    /// Consumption so far minus charging so far, up to the end of the last
    /// block. With a full start the end-of-day SOC is `cap - net`.
    net: f64,
}

fn seed_ok(inst: &BcpInstance, b: usize) -> bool {
    inst.is_night_arc(b, b) && inst.night_charge(b, b) >= inst.consumption(b) - TOLERANCE
}

pub(crate) fn greedy_runs(
    inst: &BcpInstance,
    window: OvernightWindow,
) -> Result<Vec<Vec<usize>>, BcpError> {
    let p = &inst.params;
    let cap = p.battery_cap;
    let mut remaining: Vec<usize> = (0..inst.len()).collect();
    let mut runs = Vec::new();
    let mut k = 0usize;
    let mut open: Option<Vehicle> = None;

    while !remaining.is_empty() {
        let Some(v) = open.as_mut() else {
            let b = remaining.remove(0);
            if !seed_ok(inst, b) {
                return Err(BcpError::Infeasible {
                    block: inst.block(b).id,
                });
            }
            open = Some(Vehicle {
                blocks: vec![b],
                soc: cap,
                net: inst.consumption(b),
            });
            k = 0;
            continue;
        };
        let i = *v.blocks.last().unwrap();
        let first = v.blocks[0];
        // Blocks departing before `i` ends plus the minimum layover fail the
        // temporal test anyway; jump past them.
        let earliest = inst.end(i) + p.layover_min;
        k = k.max(remaining.partition_point(|&b| inst.start(b) < earliest));

        let mut inserted = false;
        if let Some(&j) = remaining.get(k) {
            if inst.is_day_arc(i, j) && inst.is_night_arc(j, first) {
                let (bi, big_i, big_j) = (v.soc, inst.consumption(i), inst.consumption(j));
                let u = (cap - bi + big_i).min(inst.day_charge_cap(i, j));
                let b = bi - big_i + u;
                let night = match window {
                    OvernightWindow::Consistent => inst.night_charge(j, first),
                    OvernightWindow::FromExtended => inst.night_charge(i, first),
                };
                let u_night = (cap - b + big_j).min(night);
                let net = v.net + big_j - u;
                if u_night >= net - TOLERANCE && bi >= big_i - TOLERANCE && b >= big_j - TOLERANCE {
                    v.blocks.push(j);
                    v.soc = b;
                    v.net = net;
                    remaining.remove(k);
                    inserted = true;
                }
            }
        }
        if !inserted {
            if k + 1 < remaining.len() {
                k += 1;
            } else {
                runs.push(open.take().unwrap().blocks);
                k = 0;
            }
        }
    }
    if let Some(v) = open {
        runs.push(v.blocks);
    }
    Ok(runs)
}

pub fn solve_greedy(inst: &BcpInstance) -> Result<ChainSolution, BcpError> {
    solve_greedy_with(inst, OvernightWindow::Consistent)
}

pub fn solve_greedy_with(
    inst: &BcpInstance,
    window: OvernightWindow,
) -> Result<ChainSolution, BcpError> {
    let runs = greedy_runs(inst, window)?;
    let plan = NextDayPlan {
        successor: (0..runs.len()).collect(),
        start_soc: vec![inst.params.battery_cap; runs.len()],
    };
    Ok(assemble(inst, &runs, &plan, false))
}

/// Percentage by which `value` exceeds `reference`.
pub fn percent_gap(value: f64, reference: f64) -> Result<f64, BcpError> {
    if !(reference > 0.0) {
        return Err(BcpError::InvalidParams(
            "reference objective must be positive".into(),
        ));
    }
    Ok(100.0 * (value - reference) / reference)
}

/// Greedy objective relative to a reference objective, in percent.
pub fn greedy_gap(inst: &BcpInstance, reference_objective: f64) -> Result<f64, BcpError> {
    percent_gap(solve_greedy(inst)?.objective, reference_objective)
}
