use std::fs::File;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;

use evsched::bcp::{
    build_instance, chain_without_battery, replay_next_day, solve_exact_with, validate,
    write_lp_file, BcpInstance, ChainSolution, ExactConfig, ValidationReport,
};
use evsched::dac::{solve_dac, DacConfig};
use evsched::greedy::solve_greedy_with;
use evsched::metrics::{
    block_efficiency, plot_rows, replacement_ratio, runs_efficiency, schedule_efficiency,
    split_by_range, write_plot_csv, EfficiencyReport, FleetReport,
};
use evsched::schedule_data::{clip_to_horizon, read_depots_csv, read_trips_csv, Depot, TravelModel, Trip};
use evsched::sdvsp::{
    read_blocks_csv, read_blocks_jsonl, solve_sdvsp, write_blocks_csv, write_blocks_jsonl, Block,
    SdvspInstance,
};
use evsched::DataError;

use crate::config::{env_workers, ConfigFlags, Method, RunConfig};
use crate::{InputArgs, ValidationFailed};

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub flags: ConfigFlags,
    /// Output directory for blocks, solution and report.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Check a saved solution against the input instead of solving.
    #[arg(long, value_name = "SOLUTION_JSON")]
    pub validate_only: Option<PathBuf>,
    /// Write the chaining model of the electric pool in LP format.
    #[arg(long)]
    pub lp_out: Option<PathBuf>,
    /// Write MAX/MIN general constraints instead of big-M rows.
    #[arg(long)]
    pub lp_general: bool,
    /// Long-format CSV of fleet, efficiency and time-breakdown figures.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
}

/// Depot at the centroid of all trip endpoints.
fn centroid_depot(trips: &[Trip]) -> Result<Depot, DataError> {
    let n = (2 * trips.len()).max(1) as f64;
    let (lat, lon) = trips.iter().fold((0.0, 0.0), |(a, b), t| {
        (
            a + t.origin.lat + t.destination.lat,
            b + t.origin.lon + t.destination.lon,
        )
    });
    Depot::new("centroid", lat / n, lon / n)
}

pub fn pick_depot(input: &InputArgs, trips: &[Trip]) -> Result<Depot> {
    let Some(path) = &input.depots else {
        return Ok(centroid_depot(trips)?);
    };
    let depots = read_depots_csv(path)?;
    match (&input.depot, depots.len()) {
        (_, 0) => Err(DataError::NoDepots.into()),
        (None, 1) => Ok(depots.into_iter().next().unwrap()),
        (None, _) => bail!(invalid(path, "several depots listed; choose one with --depot")),
        (Some(id), _) => depots
            .into_iter()
            .find(|d| &d.id == id)
            .ok_or_else(|| invalid(path, format!("no depot `{id}`")).into()),
    }
}

fn invalid(path: &Path, message: impl Into<String>) -> DataError {
    DataError::Invalid {
        file: path.display().to_string(),
        message: message.into(),
    }
}

/// Chains trips into blocks with the configured block cost and weight.
pub fn blocks_from_trips(trips: Vec<Trip>, depot: &Depot, cfg: &RunConfig) -> Vec<Block> {
    let (trips, _) = clip_to_horizon(trips, cfg.horizon_s);
    let inst = SdvspInstance::build(trips, depot, &TravelModel::default())
        .with_params(cfg.sdvsp_params());
    solve_sdvsp(&inst).blocks
}

pub fn read_blocks(path: &Path) -> Result<Vec<Block>, DataError> {
    if path.extension().is_some_and(|e| e == "jsonl") {
        read_blocks_jsonl(path)
    } else {
        read_blocks_csv(path)
    }
}

pub fn load_blocks(input: &InputArgs, cfg: &RunConfig) -> Result<Vec<Block>> {
    match (&input.trips, &input.blocks) {
        (Some(path), None) => {
            let trips = read_trips_csv(path)?;
            let depot = pick_depot(input, &trips)?;
            Ok(blocks_from_trips(trips, &depot, cfg))
        }
        (None, Some(path)) => Ok(read_blocks(path)?),
        _ => bail!("give either --trips or --blocks"),
    }
}

/// Blocks split into the electric instance and the diesel pool.
pub struct Pools {
    pub all: Vec<Block>,
    pub ev: BcpInstance,
    pub dv: Vec<Block>,
}

pub fn pools(blocks: Vec<Block>, cfg: &RunConfig) -> Result<Pools> {
    let (ev, dv) = split_by_range(&blocks, cfg.range_limit_s());
    let ev = build_instance(ev, cfg.energy_params())?;
    Ok(Pools { all: blocks, ev, dv })
}

/// Whether solutions of `method` are built with every run starting full.
pub fn full_start(method: Method, cfg: &RunConfig) -> bool {
    match method {
        Method::Exact => cfg.full_initial,
        Method::Greedy | Method::Dac => true,
    }
}

pub struct Chained {
    pub solution: ChainSolution,
    pub mip_gap: Option<f64>,
}

pub fn chain(inst: &BcpInstance, method: Method, cfg: &RunConfig) -> Result<Chained> {
    let limit = Duration::from_secs_f64(cfg.time_limit_s.max(0.0));
    Ok(match method {
        Method::Exact => {
            let out = solve_exact_with(
                inst,
                &ExactConfig {
                    time_limit: Some(limit),
                    full_initial: cfg.full_initial,
                    block_limit: (cfg.exact_block_limit > 0).then_some(cfg.exact_block_limit),
                    warm_start: true,
                },
            )?;
            Chained {
                mip_gap: Some(out.mip_gap()),
                solution: out.solution,
            }
        }
        Method::Greedy => Chained {
            solution: solve_greedy_with(inst, cfg.overnight_window)?,
            mip_gap: None,
        },
        Method::Dac => Chained {
            solution: solve_dac(
                inst,
                &DacConfig {
                    subproblem_cap: cfg.subproblem_cap,
                    time_limit_per_sub: Some(limit),
                    seed: cfg.seed,
                    workers: env_workers(),
                },
            )?,
            mip_gap: None,
        },
    })
}

#[derive(Debug, Serialize)]
struct BlockCounts {
    total: usize,
    ev: usize,
    dv: usize,
}

#[derive(Debug, Serialize)]
struct Report<'a> {
    config: &'a RunConfig,
    blocks: BlockCounts,
    objective: f64,
    optimal: bool,
    mip_gap: Option<f64>,
    ev_vehicles: usize,
    validation: &'a ValidationReport,
    day2: &'a ValidationReport,
    fleet: &'a FleetReport,
    dv_only_vehicles: usize,
    replacement_ratio: Option<f64>,
    block_efficiency: Option<f64>,
    ev_efficiency: Option<EfficiencyReport>,
    fleet_efficiency: Option<EfficiencyReport>,
    dv_runs: Vec<Vec<u32>>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(file, value)?;
    Ok(())
}

pub fn run(a: SolveArgs) -> Result<()> {
    let mut cfg = RunConfig::default();
    cfg.apply(&a.flags)?;
    let blocks = load_blocks(&a.input, &cfg)?;
    let pools = pools(blocks, &cfg)?;

    if let Some(path) = &a.validate_only {
        let sol = ChainSolution::read_json(path)?;
        let report = validate(&pools.ev, &sol, cfg.full_initial);
        println!("{}", serde_json::to_string_pretty(&report)?);
        if !report.feasible {
            return Err(ValidationFailed(report.violations.len()).into());
        }
        return Ok(());
    }

    if let Some(path) = &a.lp_out {
        write_lp_file(&pools.ev, path, !a.lp_general, full_start(cfg.method, &cfg))?;
    }

    let chained = chain(&pools.ev, cfg.method, &cfg)?;
    let sol = &chained.solution;
    let full = full_start(cfg.method, &cfg);
    let validation = validate(&pools.ev, sol, full);
    let day2 = replay_next_day(&pools.ev, sol);

    let params = cfg.energy_params();
    let dv_runs = chain_without_battery(&pools.dv, &params);
    let dv_only = chain_without_battery(&pools.all, &params).len();
    let fleet = FleetReport::new(sol.vehicles(), dv_runs.len());
    let ev_eff = schedule_efficiency(sol, &pools.ev).ok();
    let mut all_runs = sol.runs.clone();
    all_runs.extend(dv_runs.iter().cloned());
    let fleet_eff = runs_efficiency(&pools.all, &all_runs, cfg.horizon_s).ok();

    let report = Report {
        config: &cfg,
        blocks: BlockCounts {
            total: pools.all.len(),
            ev: pools.ev.len(),
            dv: pools.dv.len(),
        },
        objective: sol.objective,
        optimal: sol.optimal,
        mip_gap: chained.mip_gap,
        ev_vehicles: sol.vehicles(),
        validation: &validation,
        day2: &day2,
        fleet: &fleet,
        dv_only_vehicles: dv_only,
        replacement_ratio: replacement_ratio(fleet.n_ev, fleet.n_dv, dv_only).ok(),
        block_efficiency: block_efficiency(&pools.all).ok(),
        ev_efficiency: ev_eff.clone(),
        fleet_efficiency: fleet_eff,
        dv_runs,
    };

    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write_blocks_csv(&dir.join("blocks.csv"), &pools.all)?;
        write_blocks_jsonl(&dir.join("blocks.jsonl"), &pools.all)?;
        sol.write_json(&dir.join("solution.json"))?;
        write_json(&dir.join("report.json"), &report)?;
    } else {
        println!("{}", sol.to_json());
    }
    if let Some(path) = &a.plot_data {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let scenario = format!("{}mi", cfg.range_miles);
        write_plot_csv(file, &plot_rows(&scenario, &fleet, ev_eff.as_ref()))?;
    }
    eprintln!(
        "{}: {} EV + {} DV vehicles, objective {}, {}",
        cfg.method,
        fleet.n_ev,
        fleet.n_dv,
        sol.objective,
        if sol.optimal { "optimal" } else { "not proven optimal" }
    );
    if !validation.feasible || !day2.feasible {
        for v in validation.violations.iter().chain(&day2.violations) {
            eprintln!("  {} at {}: {}", v.constraint, v.at, v.magnitude);
        }
        return Err(ValidationFailed(validation.violations.len() + day2.violations.len()).into());
    }
    Ok(())
}
