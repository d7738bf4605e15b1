//! Closed-form SOC propagation along a run.
//!
//! With charging always set to the largest admissible amount, the SOC at the
//! start of every block is a function of the run's starting SOC `s` of the
//! form `min(level, s + offset)`. Composing one block at a time keeps two
//! numbers per run plus the lowest feasible starting SOC.

use super::{BcpInstance, TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RunProfile {
    pub first: usize,
    pub last: usize,
    /// Lowest starting SOC that keeps every block served.
    pub min_start: f64,
    /// SOC at the start of `last` is `min(level, s + offset)`.
    level: f64,
    offset: f64,
}

impl RunProfile {
    pub fn start(inst: &BcpInstance, block: usize) -> Self {
        RunProfile {
            first: block,
            last: block,
            min_start: inst.consumption(block),
            level: inst.params.battery_cap,
            offset: 0.0,
        }
    }

    /// Appends `next` after the current last block. `None` when no starting
    /// SOC can serve the extended run. The caller checks arc membership.
    pub fn extend(&self, inst: &BcpInstance, next: usize) -> Option<Self> {
        let cap = inst.params.battery_cap;
        let drawn = inst.consumption(self.last);
        let charge = inst.day_charge_cap(self.last, next);
        let level = cap.min(self.level - drawn + charge);
        let offset = self.offset - drawn + charge;
        let need = inst.consumption(next);
        if level < need - TOLERANCE {
            return None;
        }
        let min_start = self.min_start.max(need - offset);
        if min_start > cap + TOLERANCE {
            return None;
        }
        Some(RunProfile {
            first: self.first,
            last: next,
            min_start,
            level,
            offset,
        })
    }

    /// SOC left after the last block when the run starts at `soc`.
    pub fn end_soc(&self, inst: &BcpInstance, soc: f64) -> f64 {
        self.end_level(inst).min(soc + self.end_offset(inst))
    }

    pub fn end_level(&self, inst: &BcpInstance) -> f64 {
        self.level - inst.consumption(self.last)
    }

    pub fn end_offset(&self, inst: &BcpInstance) -> f64 {
        self.offset - inst.consumption(self.last)
    }

    pub fn from_run(inst: &BcpInstance, run: &[usize]) -> Option<Self> {
        let mut p = RunProfile::start(inst, run[0]);
        for &b in &run[1..] {
            if !inst.is_day_arc(p.last, b) {
                return None;
            }
            p = p.extend(inst, b)?;
        }
        Some(p)
    }
}

/// SOC trace of a run started at `soc` with maximal charging.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RunTrace {
    pub soc_at_start: Vec<f64>,
    /// Charge on each internal arc.
    pub charges: Vec<f64>,
    pub end_soc: f64,
}

pub(crate) fn trace_run(inst: &BcpInstance, run: &[usize], soc: f64) -> RunTrace {
    let cap = inst.params.battery_cap;
    let mut socs = Vec::with_capacity(run.len());
    let mut charges = Vec::with_capacity(run.len().saturating_sub(1));
    let mut x = soc;
    for (k, &b) in run.iter().enumerate() {
        socs.push(x);
        let after = x - inst.consumption(b);
        if let Some(&next) = run.get(k + 1) {
            let u = inst.day_charge_cap(b, next).min(cap - after).max(0.0);
            charges.push(u);
            x = after + u;
        } else {
            x = after;
        }
    }
    RunTrace {
        soc_at_start: socs,
        charges,
        end_soc: x,
    }
}
