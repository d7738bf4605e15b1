//! Fleet-level evaluation: EV/DV split, block and schedule efficiency, and
//! EV-per-DV replacement.

use std::collections::HashMap;
use std::io::Write;

use serde::Serialize;

use crate::bcp::{BcpInstance, ChainSolution};
use crate::error::MetricsError;
use crate::sdvsp::Block;

/// Speed used to turn a range in miles into seconds of driving.
pub const RANGE_SPEED_MPH: f64 = 30.0;

/// Driving seconds covered by `miles` at 30 mph; 60 miles gives 7200 s.
pub fn range_seconds(miles: f64) -> f64 {
    miles / RANGE_SPEED_MPH * 3600.0
}

/// Blocks within range go to the EV pool, the rest to the diesel pool.
pub fn split_by_range(blocks: &[Block], range_limit_s: f64) -> (Vec<Block>, Vec<Block>) {
    blocks
        .iter()
        .cloned()
        .partition(|b| b.consumption as f64 <= range_limit_s)
}

/// Revenue time over total block time.
pub fn block_efficiency(blocks: &[Block]) -> Result<f64, MetricsError> {
    if blocks.is_empty() {
        return Err(MetricsError::Empty("block efficiency"));
    }
    let revenue: i64 = blocks.iter().map(|b| b.revenue_time).sum();
    let total: i64 = blocks.iter().map(Block::duration).sum();
    Ok(revenue as f64 / total as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficiencyReport {
    pub vehicles: usize,
    pub horizon_s: i64,
    pub block_eff: f64,
    pub schedule_eff: f64,
    pub service_s: f64,
    pub deadhead_s: f64,
    pub intertrip_layover_s: f64,
    /// Depot dwell between blocks of the same run.
    pub day_depot_layover_s: f64,
    /// Horizon time outside each run's first departure to last return.
    pub overnight_depot_layover_s: f64,
}

impl EfficiencyReport {
    /// Sum of all time components; equals `vehicles * horizon_s`.
    pub fn accounted_s(&self) -> f64 {
        self.service_s
            + self.deadhead_s
            + self.intertrip_layover_s
            + self.day_depot_layover_s
            + self.overnight_depot_layover_s
    }
}

/// Efficiency of arbitrary runs of block ids.
pub fn runs_efficiency(
    blocks: &[Block],
    runs: &[Vec<u32>],
    horizon: i64,
) -> Result<EfficiencyReport, MetricsError> {
    if runs.is_empty() {
        return Err(MetricsError::Empty("schedule efficiency"));
    }
    let by_id: HashMap<u32, &Block> = blocks.iter().map(|b| (b.id, b)).collect();
    let mut r = EfficiencyReport {
        vehicles: runs.len(),
        horizon_s: horizon,
        block_eff: 0.0,
        schedule_eff: 0.0,
        service_s: 0.0,
        deadhead_s: 0.0,
        intertrip_layover_s: 0.0,
        day_depot_layover_s: 0.0,
        overnight_depot_layover_s: 0.0,
    };
    let mut used = Vec::new();
    for run in runs {
        let run: Vec<&Block> = run.iter().map(|id| by_id[id]).collect();
        for b in &run {
            r.service_s += b.revenue_time as f64;
            r.deadhead_s += b.deadhead_time as f64;
            r.intertrip_layover_s += b.intertrip_layover as f64;
            used.push((*b).clone());
        }
        for w in run.windows(2) {
            r.day_depot_layover_s += (w[1].start_time - w[0].end_time) as f64;
        }
        let span = run[run.len() - 1].end_time - run[0].start_time;
        r.overnight_depot_layover_s += (horizon - span) as f64;
    }
    r.block_eff = block_efficiency(&used)?;
    r.schedule_eff = r.service_s / (runs.len() as f64 * horizon as f64);
    Ok(r)
}

pub fn schedule_efficiency(
    sol: &ChainSolution,
    inst: &BcpInstance,
) -> Result<EfficiencyReport, MetricsError> {
    runs_efficiency(inst.blocks(), &sol.runs, inst.params.horizon)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FleetReport {
    pub n_ev: usize,
    pub n_dv: usize,
    pub ev_share: f64,
    pub dv_share: f64,
    pub total: usize,
}

impl FleetReport {
    pub fn new(n_ev: usize, n_dv: usize) -> Self {
        let total = n_ev + n_dv;
        let share = |n: usize| if total == 0 { 0.0 } else { n as f64 / total as f64 };
        FleetReport {
            n_ev,
            n_dv,
            ev_share: share(n_ev),
            dv_share: share(n_dv),
            total,
        }
    }
}

/// EVs deployed per diesel bus they replace.
pub fn replacement_ratio(
    n_ev: usize,
    n_dv_scenario: usize,
    n_dv_only: usize,
) -> Result<f64, MetricsError> {
    if n_dv_only <= n_dv_scenario {
        return Err(MetricsError::NoReplacement {
            dv_only: n_dv_only,
            dv_scenario: n_dv_scenario,
        });
    }
    Ok(n_ev as f64 / (n_dv_only - n_dv_scenario) as f64)
}

/// One value of the long-format plot table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotRow {
    pub figure: String,
    pub scenario: String,
    pub series: String,
    pub value: f64,
}

impl PlotRow {
    pub fn new(figure: &str, scenario: &str, series: &str, value: f64) -> Self {
        PlotRow {
            figure: figure.into(),
            scenario: scenario.into(),
            series: series.into(),
            value,
        }
    }
}

/// Rows for the fleet-share, efficiency and time-breakdown tables of one
/// scenario.
pub fn plot_rows(scenario: &str, fleet: &FleetReport, eff: Option<&EfficiencyReport>) -> Vec<PlotRow> {
    let mut rows = vec![
        PlotRow::new("fleet", scenario, "n_ev", fleet.n_ev as f64),
        PlotRow::new("fleet", scenario, "n_dv", fleet.n_dv as f64),
        PlotRow::new("fleet", scenario, "ev_share", fleet.ev_share),
        PlotRow::new("fleet", scenario, "dv_share", fleet.dv_share),
    ];
    if let Some(e) = eff {
        rows.extend([
            PlotRow::new("efficiency", scenario, "block_eff", e.block_eff),
            PlotRow::new("efficiency", scenario, "schedule_eff", e.schedule_eff),
            PlotRow::new("time", scenario, "service_s", e.service_s),
            PlotRow::new("time", scenario, "deadhead_s", e.deadhead_s),
            PlotRow::new("time", scenario, "intertrip_layover_s", e.intertrip_layover_s),
            PlotRow::new("time", scenario, "day_depot_layover_s", e.day_depot_layover_s),
            PlotRow::new(
                "time",
                scenario,
                "overnight_depot_layover_s",
                e.overnight_depot_layover_s,
            ),
        ]);
    }
    rows
}

pub fn write_plot_csv<W: Write>(out: W, rows: &[PlotRow]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blk(id: u32, start: i64, end: i64, revenue: i64, deadhead: i64) -> Block {
        Block {
            id,
            trip_ids: vec![],
            start_time: start,
            end_time: end,
            consumption: revenue + deadhead,
            revenue_time: revenue,
            deadhead_time: deadhead,
            intertrip_layover: end - start - revenue - deadhead,
        }
    }

    #[test]
    fn range_conversion() {
        assert_eq!(range_seconds(60.0), 7200.0);
        let (ev, dv) = split_by_range(&[blk(1, 0, 8000, 7500, 0), blk(2, 0, 100, 50, 0)], 7200.0);
        assert_eq!(ev.len(), 1);
        assert_eq!(dv[0].id, 1);
        let (ev, _) = split_by_range(&[blk(1, 0, 8000, 7500, 0)], f64::INFINITY);
        assert_eq!(ev.len(), 1);
    }

    #[test]
    fn block_efficiency_examples() {
        assert_eq!(block_efficiency(&[blk(1, 0, 400, 300, 0)]).unwrap(), 0.75);
        assert_eq!(block_efficiency(&[blk(1, 0, 100, 100, 0)]).unwrap(), 1.0);
        let two = [blk(1, 0, 400, 300, 0), blk(2, 0, 100, 100, 0)];
        assert_eq!(block_efficiency(&two).unwrap(), 0.8);
        assert_eq!(block_efficiency(&[]), Err(MetricsError::Empty("block efficiency")));
    }

    #[test]
    fn schedule_efficiency_examples() {
        let blocks = [blk(1, 0, 21_600, 21_600, 0), blk(2, 30_000, 30_100, 0, 0)];
        let one = runs_efficiency(&blocks, &[vec![1]], 86_400).unwrap();
        assert_eq!(one.schedule_eff, 0.25);
        let two = runs_efficiency(&blocks, &[vec![1], vec![2]], 86_400).unwrap();
        assert_eq!(two.schedule_eff, 0.125);
        let chained = runs_efficiency(&blocks, &[vec![1, 2]], 86_400).unwrap();
        assert_eq!(chained.day_depot_layover_s, 8400.0);
        assert_eq!(chained.accounted_s(), 86_400.0);
    }

    #[test]
    fn replacement() {
        assert_eq!(replacement_ratio(16, 0, 10).unwrap(), 1.6);
        assert_eq!(replacement_ratio(10, 5, 15).unwrap(), 1.0);
        assert_eq!(replacement_ratio(30, 80, 100).unwrap(), 1.5);
        assert!(replacement_ratio(3, 10, 10).is_err());
    }

    #[test]
    fn fleet_shares() {
        let f = FleetReport::new(3, 1);
        assert_eq!((f.ev_share, f.dv_share, f.total), (0.75, 0.25, 4));
    }
}
