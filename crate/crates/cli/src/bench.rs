//! Exact vs greedy vs divide-and-conquer on random subsets.
//!
//! Each repetition draws its own ChaCha8 stream: the generator is seeded with
//! `--seed` and switched to stream `size << 32 | rep`, so any single row can
//! be reproduced alone and the table does not depend on worker count.

use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::Args;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use evsched::bcp::{solve_exact_with, BcpInstance, ExactConfig};
use evsched::dac::{solve_dac, split_levels, DacConfig};
use evsched::greedy::{percent_gap, solve_greedy_with};
use evsched::schedule_data::{read_trips_csv, Trip};
use evsched::sdvsp::Block;
use evsched::synth::BlockGen;

use crate::config::{env_workers, ConfigFlags, RunConfig};
use crate::solve::{blocks_from_trips, pick_depot, pools, read_blocks};
use crate::InputArgs;

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Sample random blocks from the built-in generator instead of a file;
    /// sizes then count blocks.
    #[arg(long, conflicts_with_all = ["trips", "blocks"])]
    pub synthetic_blocks: bool,
    #[command(flatten)]
    pub flags: ConfigFlags,
    /// Subset sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    /// Repetitions per size; one value applies to every size.
    #[arg(long, value_delimiter = ',', required = true)]
    pub reps: Vec<usize>,
    /// Summary CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// One row per repetition.
    #[arg(long)]
    pub per_rep: Option<PathBuf>,
}

enum Source {
    Trips(Vec<Trip>, evsched::schedule_data::Depot),
    Blocks(Vec<Block>),
    Synthetic,
}

impl Source {
    fn available(&self) -> Option<usize> {
        match self {
            Source::Trips(t, _) => Some(t.len()),
            Source::Blocks(b) => Some(b.len()),
            Source::Synthetic => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RepRow {
    pub size: usize,
    pub rep: usize,
    pub blocks: usize,
    pub exact_obj: Option<f64>,
    pub optimal: bool,
    pub mip_gap: Option<f64>,
    pub greedy_obj: Option<f64>,
    pub greedy_gap: Option<f64>,
    pub m: usize,
    pub dac_obj: Option<f64>,
    pub dac_gap: Option<f64>,
    pub t_exact: f64,
    pub t_greedy: f64,
    pub t_dac: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub n_trips: usize,
    pub n_solved: usize,
    pub n_opt: usize,
    pub avg_mip_gap: Option<f64>,
    pub greedy_gap: Option<f64>,
    pub m: Option<f64>,
    pub dac_gap: Option<f64>,
    pub t_exact: Option<f64>,
    pub t_greedy: Option<f64>,
    pub t_dac: Option<f64>,
}

fn rep_rng(seed: u64, size: usize, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((size as u64) << 32) | rep as u64);
    rng
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed().as_secs_f64())
}

fn instance(src: &Source, cfg: &RunConfig, size: usize, rep: usize) -> Result<BcpInstance> {
    let mut rng = rep_rng(cfg.seed, size, rep);
    let blocks = match src {
        Source::Trips(trips, depot) => {
            let mut pick = sample(&mut rng, trips.len(), size).into_vec();
            pick.sort_unstable();
            let subset = pick.into_iter().map(|k| trips[k].clone()).collect();
            blocks_from_trips(subset, depot, cfg)
        }
        Source::Blocks(all) => {
            let mut pick = sample(&mut rng, all.len(), size).into_vec();
            pick.sort_unstable();
            pick.into_iter().map(|k| all[k].clone()).collect()
        }
        Source::Synthetic => BlockGen::default().blocks(&mut rng, size, &cfg.energy_params()),
    };
    Ok(pools(blocks, cfg)?.ev)
}

/// Runs all three methods with every run starting on a full battery.
pub fn bench_rep(inst: &BcpInstance, cfg: &RunConfig, size: usize, rep: usize) -> RepRow {
    let limit = Duration::from_secs_f64(cfg.time_limit_s.max(0.0));
    let (exact, t_exact) = timed(|| {
        solve_exact_with(
            inst,
            &ExactConfig {
                time_limit: Some(limit),
                full_initial: true,
                block_limit: None,
                warm_start: true,
            },
        )
    });
    let (greedy, t_greedy) = timed(|| solve_greedy_with(inst, cfg.overnight_window));
    let dac_cfg = DacConfig {
        subproblem_cap: cfg.subproblem_cap,
        time_limit_per_sub: Some(limit),
        seed: cfg.seed,
        workers: None,
    };
    let (dac, t_dac) = timed(|| solve_dac(inst, &dac_cfg));

    let exact = exact.ok();
    let reference = exact.as_ref().map(|o| o.solution.objective);
    let gap = |v: Option<f64>| match (v, reference) {
        (Some(v), Some(r)) => percent_gap(v, r).ok(),
        _ => None,
    };
    let greedy_obj = greedy.ok().map(|s| s.objective);
    let dac_obj = dac.ok().map(|s| s.objective);
    RepRow {
        size,
        rep,
        blocks: inst.len(),
        exact_obj: reference,
        optimal: exact.as_ref().is_some_and(|o| o.solution.optimal),
        mip_gap: exact.as_ref().map(|o| 100.0 * o.mip_gap()),
        greedy_obj,
        greedy_gap: gap(greedy_obj),
        m: 1 << split_levels(inst.len(), cfg.subproblem_cap.max(1)),
        dac_obj,
        dac_gap: gap(dac_obj),
        t_exact,
        t_greedy,
        t_dac,
    }
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values.flatten().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

pub fn summarize(size: usize, rows: &[RepRow]) -> SummaryRow {
    let solved: Vec<&RepRow> = rows.iter().filter(|r| r.exact_obj.is_some()).collect();
    SummaryRow {
        n_trips: size,
        n_solved: solved.len(),
        n_opt: solved.iter().filter(|r| r.optimal).count(),
        avg_mip_gap: mean(solved.iter().map(|r| r.mip_gap)),
        greedy_gap: mean(rows.iter().map(|r| r.greedy_gap)),
        m: mean(rows.iter().map(|r| Some(r.m as f64))),
        dac_gap: mean(rows.iter().map(|r| r.dac_gap)),
        t_exact: mean(rows.iter().map(|r| Some(r.t_exact))),
        t_greedy: mean(rows.iter().map(|r| Some(r.t_greedy))),
        t_dac: mean(rows.iter().map(|r| Some(r.t_dac))),
    }
}

fn write_csv<T: Serialize>(out: Box<dyn Write>, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(
            std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        ),
        None => Box::new(std::io::stdout()),
    })
}

pub fn run(a: BenchArgs) -> Result<()> {
    let mut cfg = RunConfig::default();
    cfg.apply(&a.flags)?;
    let reps: Vec<usize> = match a.reps.len() {
        1 => vec![a.reps[0]; a.sizes.len()],
        n if n == a.sizes.len() => a.reps.clone(),
        _ => bail!("--reps needs one value or one per size"),
    };
    let src = if a.synthetic_blocks {
        Source::Synthetic
    } else if let Some(path) = &a.input.trips {
        let trips = read_trips_csv(path)?;
        let depot = pick_depot(&a.input, &trips)?;
        Source::Trips(trips, depot)
    } else if let Some(path) = &a.input.blocks {
        Source::Blocks(read_blocks(path)?)
    } else {
        bail!("give --trips, --blocks or --synthetic-blocks");
    };
    if let Some(n) = src.available() {
        if let Some(&s) = a.sizes.iter().find(|&&s| s > n) {
            bail!(evsched::DataError::Invalid {
                file: "bench input".into(),
                message: format!("size {s} exceeds the {n} available records"),
            });
        }
    }

    let jobs: Vec<(usize, usize)> = a
        .sizes
        .iter()
        .zip(&reps)
        .flat_map(|(&s, &r)| (0..r).map(move |k| (s, k)))
        .collect();
    let work = || -> Result<Vec<RepRow>> {
        jobs.par_iter()
            .map(|&(size, rep)| {
                let inst = instance(&src, &cfg, size, rep)?;
                Ok(bench_rep(&inst, &cfg, size, rep))
            })
            .collect()
    };
    let rows = match env_workers() {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .context("building worker pool")?
            .install(work)?,
        None => work()?,
    };

    let summary: Vec<SummaryRow> = a
        .sizes
        .iter()
        .map(|&s| {
            let mine: Vec<RepRow> = rows.iter().filter(|r| r.size == s).cloned().collect();
            summarize(s, &mine)
        })
        .collect();
    if a.per_rep.is_some() {
        write_csv(sink(&a.per_rep)?, &rows)?;
    }
    write_csv(sink(&a.out)?, &summary)
}
