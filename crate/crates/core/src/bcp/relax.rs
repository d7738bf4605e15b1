//! Battery-free chaining as an assignment problem.
//!
//! Dropping every SOC and overnight constraint leaves a chain cover of the
//! blocks: each block is either dispatched from the depot at the vehicle
//! cost or follows exactly one predecessor on a same-day arc. That is a
//! bipartite assignment solved here by min-cost flow. It lower-bounds the
//! battery-aware optimum and chains the diesel pool, which has no range.

use crate::mcf::MinCostFlow;
use crate::sdvsp::Block;

use super::{BcpInstance, EnergyParams, RunProfile};

const SCALE: f64 = 1000.0;

/// Minimum-cost predecessor assignment. `preds` are candidate predecessor
/// slots, `succ_arcs(p)` lists `(target, cost)` pairs, and `targets` is the
/// number of blocks needing a predecessor.
struct Assignment {
    cost: f64,
    /// Chosen slot per target; `None` is a new vehicle.
    pred: Vec<Option<usize>>,
    /// Some cost was not a whole number of scaling units.
    rounded: bool,
}

fn scaled(c: f64, rounded: &mut bool) -> i64 {
    let x = c * SCALE;
    if (x - x.round()).abs() > 1e-7 {
        *rounded = true;
    }
    x.round() as i64
}

fn assign(
    preds: usize,
    targets: usize,
    vehicle_cost: f64,
    mut succ_arcs: impl FnMut(usize, &mut dyn FnMut(usize, f64)),
) -> Assignment {
    let mut rounded = false;
    let (src, sink) = (0, 1);
    let left = |p: usize| 2 + p;
    let right = |t: usize| 2 + preds + t;
    let mut g = MinCostFlow::new(2 + preds + targets);
    let mut edges = Vec::new();
    for p in 0..preds {
        g.add_edge(src, left(p), 1, 0);
    }
    for p in 0..preds {
        succ_arcs(p, &mut |t, c| {
            let e = g.add_edge(left(p), right(t), 1, scaled(c, &mut rounded));
            edges.push((p, t, e));
        });
    }
    let fresh = scaled(vehicle_cost, &mut rounded);
    for t in 0..targets {
        g.add_edge(src, right(t), 1, fresh);
        g.add_edge(right(t), sink, 1, 0);
    }
    let (flow, cost) = g.run(src, sink, targets as i64);
    debug_assert_eq!(flow, targets as i64);
    let mut pred = vec![None; targets];
    for (p, t, e) in edges {
        if g.flow(e) > 0 {
            pred[t] = Some(p);
        }
    }
    Assignment {
        cost: cost as f64 / SCALE,
        pred,
        rounded,
    }
}

/// Lower bound on the cost of serving blocks `from..` given the open runs.
/// `pair_ok[i * n + j]` tells whether `j` can follow `i` from a full battery;
/// open runs use their own profile instead. When costs had to be rounded a
/// slack of one scaling unit per block keeps the bound valid.
pub(crate) fn relaxed_cost(
    inst: &BcpInstance,
    open: &[RunProfile],
    from: usize,
    pair_ok: &[bool],
) -> f64 {
    let n = inst.len();
    if from >= n {
        return 0.0;
    }
    let targets = n - from;
    let preds = open.len() + targets;
    let a = assign(preds, targets, inst.params.vehicle_cost, |p, emit| {
        if let Some(run) = open.get(p) {
            for j in from..n {
                if inst.is_day_arc(run.last, j) && run.extend(inst, j).is_some() {
                    emit(j - from, inst.arc_cost(run.last, j));
                }
            }
        } else {
            let i = from + p - open.len();
            for j in from..n {
                if pair_ok[i * n + j] {
                    emit(j - from, inst.arc_cost(i, j));
                }
            }
        }
    });
    if a.rounded {
        (a.cost - targets as f64 / SCALE).max(0.0)
    } else {
        a.cost
    }
}

/// Same-day arcs that a full battery can serve back to back, row-major.
pub(crate) fn feasible_pairs(inst: &BcpInstance) -> Vec<bool> {
    let n = inst.len();
    let mut ok = vec![false; n * n];
    for i in 0..n {
        let start = RunProfile::start(inst, i);
        for j in 0..n {
            ok[i * n + j] = inst.is_day_arc(i, j) && start.extend(inst, j).is_some();
        }
    }
    ok
}

/// Cheapest chain cover of `blocks` ignoring battery limits. Returns runs of
/// block ids ordered by first departure.
pub fn chain_without_battery(blocks: &[Block], params: &EnergyParams) -> Vec<Vec<u32>> {
    let mut sorted: Vec<&Block> = blocks.iter().collect();
    sorted.sort_by_key(|b| (b.start_time, b.id));
    let n = sorted.len();
    let day_ok = |i: usize, j: usize| {
        let gap = sorted[j].start_time - sorted[i].end_time;
        i != j && gap >= params.layover_min && params.layover_max.is_none_or(|u| gap <= u)
    };
    let pred = assign(n, n, params.vehicle_cost, |i, emit| {
        for j in 0..n {
            if day_ok(i, j) {
                let gap = sorted[j].start_time - sorted[i].end_time;
                emit(j, params.layover_weight * gap as f64);
            }
        }
    })
    .pred;
    let mut next = vec![None; n];
    for (t, p) in pred.iter().enumerate() {
        if let Some(p) = *p {
            next[p] = Some(t);
        }
    }
    let mut runs = Vec::new();
    for (t, p) in pred.iter().enumerate() {
        if p.is_none() {
            let mut run = vec![sorted[t].id];
            let mut cur = t;
            while let Some(nx) = next[cur] {
                run.push(sorted[nx].id);
                cur = nx;
            }
            runs.push(run);
        }
    }
    runs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chains_compatible_blocks() {
        let blocks = vec![
            Block::synthetic(1, 0, 1000, 500),
            Block::synthetic(2, 1500, 2500, 500),
            Block::synthetic(3, 500, 3000, 500),
        ];
        let runs = chain_without_battery(&blocks, &EnergyParams::default());
        assert_eq!(runs, vec![vec![1, 2], vec![3]]);
    }

    #[test]
    fn ignores_range() {
        // Two 20 000 s blocks exceed any battery but still chain.
        let blocks = vec![
            Block::synthetic(1, 0, 20_000, 20_000),
            Block::synthetic(2, 20_100, 40_100, 20_000),
        ];
        let runs = chain_without_battery(&blocks, &EnergyParams::default());
        assert_eq!(runs, vec![vec![1, 2]]);
    }
}
