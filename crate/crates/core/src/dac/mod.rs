//! Divide and conquer: split the blocks by recursive bisection of their
//! compatibility graph, solve each part exactly, and take the union.
//!
//! Parts are solved as separate depots, so overnight links never cross a
//! part boundary and the union of feasible part solutions stays feasible for
//! the whole instance. Splitting can only cost optimality.

mod kl;

use std::time::Duration;

use rayon::prelude::*;

use crate::bcp::{solve_exact_with, BcpInstance, ChainSolution, ExactConfig, PartitionSummary};
use crate::error::BcpError;

pub use kl::{kl_bisect, BlockGraph, Bisection};

/// Default largest subproblem size.
pub const DEFAULT_SUBPROBLEM_CAP: usize = 20;

/// Compatibility graph: blocks joined when either can follow the other on
/// the same day.
pub fn block_graph(inst: &BcpInstance) -> BlockGraph {
    let n = inst.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if inst.is_day_arc(i, j) || inst.is_day_arc(j, i) {
                edges.push((i, j));
            }
        }
    }
    BlockGraph::new(inst.blocks().iter().map(|b| b.id).collect(), edges)
}

/// Bisection depth giving parts of at most about `cap` blocks.
pub fn split_levels(blocks: usize, cap: usize) -> u32 {
    let m = blocks.div_ceil(cap.max(1));
    if m <= 1 {
        0
    } else {
        usize::BITS - (m - 1).leading_zeros()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partitioning {
    /// Block ids per part, each ascending.
    pub parts: Vec<Vec<u32>>,
    /// Compatibility edges between different parts.
    pub cut_edges: usize,
}

/// Recursively bisects the compatibility graph into `2^levels` parts.
pub fn partition_blocks(inst: &BcpInstance, cap: usize, seed: u64) -> Result<Partitioning, BcpError> {
    if cap < 2 {
        return Err(BcpError::InvalidCap(cap));
    }
    let g = block_graph(inst);
    let levels = split_levels(inst.len(), cap);
    let mut parts: Vec<Vec<usize>> = vec![(0..g.len()).collect()];
    for level in 0..levels {
        let mut next = Vec::with_capacity(parts.len() * 2);
        for (k, part) in parts.iter().enumerate() {
            if part.len() < 2 {
                next.push(part.clone());
                next.push(Vec::new());
                continue;
            }
            let sub = g.induced(part);
            let bis = kl_bisect(&sub, seed.wrapping_add(((level as u64) << 32) | k as u64))?;
            next.push(bis.a.iter().map(|&v| part[v]).collect());
            next.push(bis.b.iter().map(|&v| part[v]).collect());
        }
        parts = next;
    }
    let mut label = vec![0usize; g.len()];
    for (k, part) in parts.iter().enumerate() {
        for &v in part {
            label[v] = k;
        }
    }
    let cut_edges = g
        .adj
        .iter()
        .enumerate()
        .map(|(v, l)| l.iter().filter(|&&w| w > v && label[w] != label[v]).count())
        .sum();
    let parts = parts
        .into_iter()
        .map(|p| {
            let mut ids: Vec<u32> = p.iter().map(|&v| g.vertices[v]).collect();
            ids.sort_unstable();
            ids
        })
        .collect();
    Ok(Partitioning { parts, cut_edges })
}

/// Sub-instances of the partition, each with its own arc sets and big-Ms.
pub fn partition_instance(
    inst: &BcpInstance,
    cap: usize,
    seed: u64,
) -> Result<Vec<BcpInstance>, BcpError> {
    let p = partition_blocks(inst, cap, seed)?;
    Ok(p.parts.iter().map(|ids| inst.restrict(ids)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DacConfig {
    pub subproblem_cap: usize,
    pub time_limit_per_sub: Option<Duration>,
    pub seed: u64,
    /// Parallel subproblem solves; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl Default for DacConfig {
    fn default() -> Self {
        DacConfig {
            subproblem_cap: DEFAULT_SUBPROBLEM_CAP,
            time_limit_per_sub: None,
            seed: 0,
            workers: None,
        }
    }
}

fn sub_config(cfg: &DacConfig) -> ExactConfig {
    ExactConfig {
        time_limit: cfg.time_limit_per_sub,
        full_initial: true,
        block_limit: None,
        warm_start: true,
    }
}

/// Solves with every run starting on a full battery. With a single part the
/// exact solution is returned unchanged.
pub fn solve_dac(inst: &BcpInstance, cfg: &DacConfig) -> Result<ChainSolution, BcpError> {
    if cfg.subproblem_cap < 2 {
        return Err(BcpError::InvalidCap(cfg.subproblem_cap));
    }
    let exact = sub_config(cfg);
    if split_levels(inst.len(), cfg.subproblem_cap) == 0 {
        return solve_exact_with(inst, &exact).map(|o| o.solution);
    }
    let partition = partition_blocks(inst, cfg.subproblem_cap, cfg.seed)?;
    let subs: Vec<BcpInstance> = partition.parts.iter().map(|ids| inst.restrict(ids)).collect();
    let solve_all = || -> Vec<Result<ChainSolution, BcpError>> {
        subs.par_iter()
            .map(|s| solve_exact_with(s, &exact).map(|o| o.solution))
            .collect()
    };
    let results = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .expect("thread pool")
            .install(solve_all),
        None => solve_all(),
    };

    let mut merged = ChainSolution::default();
    for (index, r) in results.into_iter().enumerate() {
        let s = r.map_err(|e| BcpError::Subproblem {
            index,
            source: Box::new(e),
        })?;
        merged.runs.extend(s.runs);
        merged.day_charge.extend(s.day_charge);
        merged.soc.extend(s.soc);
        merged.arc_soc.extend(s.arc_soc);
        merged.next_day.extend(s.next_day);
        merged.overnight_soc.extend(s.overnight_soc);
        merged.objective += s.objective;
    }
    merged.runs.sort_by_key(|r| {
        let b = inst.index_of(r[0]).expect("sub-instance block");
        (inst.start(b), r[0])
    });
    merged.optimal = false;
    merged.partition = Some(PartitionSummary {
        parts: partition.parts,
        cut_edges: partition.cut_edges,
    });
    Ok(merged)
}
