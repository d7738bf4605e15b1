//! Brute-force reference solvers. Deliberately naive and independent of the
//! library's search code: they enumerate every set partition and simulate
//! SOC step by step.
#![allow(dead_code)]

use evsched::bcp::EnergyParams;
use evsched::schedule_data::{Stop, Trip};
use evsched::sdvsp::{Block, SdvspInstance, SdvspParams};
use rand::Rng;

pub const TOL: f64 = 1e-6;

/// Calls `f` with every set partition of `0..n`, as a group label per item.
pub fn for_each_partition(n: usize, mut f: impl FnMut(&[usize], usize)) {
    fn rec(k: usize, labels: &mut Vec<usize>, groups: usize, f: &mut dyn FnMut(&[usize], usize)) {
        if k == labels.len() {
            f(labels, groups);
            return;
        }
        for g in 0..=groups {
            labels[k] = g;
            rec(k + 1, labels, groups.max(g + 1), f);
        }
    }
    let mut labels = vec![0; n];
    rec(0, &mut labels, 0, &mut f);
}

fn groups_of(labels: &[usize], groups: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); groups];
    for (k, &g) in labels.iter().enumerate() {
        out[g].push(k);
    }
    out
}

// ---------------------------------------------------------------- trips

/// Random trip chaining instance with integer deadheads.
pub fn random_sdvsp<R: Rng>(rng: &mut R, n: usize) -> SdvspInstance {
    let trips: Vec<Trip> = (0..n)
        .map(|k| {
            let start = rng.gen_range(0..20_000);
            let dur = rng.gen_range(300..3000);
            let s = Stop::new(format!("s{k}"), 41.0, -87.0).unwrap();
            Trip::new(format!("t{k}"), s.clone(), s, start, start + dur, "r").unwrap()
        })
        .collect();
    let dh: Vec<Vec<i64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.gen_range(0..1500)).collect())
        .collect();
    let out = (0..n).map(|_| rng.gen_range(0..900)).collect();
    let back = (0..n).map(|_| rng.gen_range(0..900)).collect();
    let params = SdvspParams {
        block_cost: rng.gen_range(0..4) as f64 * 5000.0,
        layover_weight: rng.gen_range(0..3) as f64,
    };
    SdvspInstance::from_deadheads(trips, move |i, j| dh[i][j], out, back).with_params(params)
}

/// Cheapest partition of the trips into time-ordered chains.
pub fn brute_force_sdvsp(inst: &SdvspInstance) -> f64 {
    let n = inst.trips.len();
    if n == 0 {
        return 0.0;
    }
    let t = &inst.trips;
    let arc = |i: usize, j: usize| inst.arcs.iter().find(|a| a.from == i && a.to == j);
    let mut best = f64::INFINITY;
    for_each_partition(n, |labels, groups| {
        let mut cost = 0.0;
        for mut g in groups_of(labels, groups) {
            g.sort_by_key(|&k| t[k].start_time);
            cost += inst.params.block_cost
                + inst.depot_out[g[0]] as f64
                + inst.depot_in[g[g.len() - 1]] as f64;
            for w in g.windows(2) {
                // Recompute deadhead and layover from the trips rather than
                // trusting the arc fields.
                let Some(a) = arc(w[0], w[1]) else {
                    return;
                };
                let layover = t[w[1]].start_time - t[w[0]].end_time - a.deadhead;
                if layover < 0 {
                    return;
                }
                cost += a.deadhead as f64 + inst.params.layover_weight * layover as f64;
            }
        }
        best = best.min(cost);
    });
    best
}

// ---------------------------------------------------------------- blocks

fn day_ok(p: &EnergyParams, gap: i64) -> bool {
    gap >= p.layover_min && p.layover_max.is_none_or(|u| gap <= u)
}

/// SOC after each block of `run` when it departs with `soc`; `None` if a
/// block cannot be served. Charging takes everything the gap and battery
/// allow.
pub fn simulate(blocks: &[&Block], p: &EnergyParams, soc: f64) -> Option<f64> {
    let mut x = soc;
    for (k, b) in blocks.iter().enumerate() {
        if x < b.consumption as f64 - TOL {
            return None;
        }
        x -= b.consumption as f64;
        if let Some(next) = blocks.get(k + 1) {
            let gap = (next.start_time - b.end_time) as f64;
            x = (x + gap * p.rate_day).min(p.battery_cap);
        }
    }
    Some(x)
}

struct OracleRun<'a> {
    blocks: Vec<&'a Block>,
}

impl OracleRun<'_> {
    fn first(&self) -> &Block {
        self.blocks[0]
    }
    fn last(&self) -> &Block {
        self.blocks[self.blocks.len() - 1]
    }
}

/// Is there a start SOC vector making the runs repeatable under successor
/// map `succ`? Iterates the overnight update down from a full battery; the
/// limit is the largest consistent start vector when one exists.
fn next_day_ok(runs: &[OracleRun], succ: &[usize], p: &EnergyParams, full: bool) -> bool {
    let cap = p.battery_cap;
    let g = |r: usize| {
        let q = succ[r];
        (p.horizon + runs[q].first().start_time - runs[r].last().end_time) as f64 * p.rate_night
    };
    if full {
        return (0..runs.len()).all(|r| match simulate(&runs[r].blocks, p, cap) {
            Some(end) => (end + g(r)).min(cap) >= cap - TOL,
            None => false,
        });
    }
    let mut s = vec![cap; runs.len()];
    for _ in 0..2000 {
        let mut next = vec![cap; runs.len()];
        for r in 0..runs.len() {
            let Some(end) = simulate(&runs[r].blocks, p, s[r]) else {
                return false;
            };
            let q = succ[r];
            next[q] = next[q].min((end + g(r)).min(cap));
        }
        let moved = next.iter().zip(&s).any(|(a, b)| (a - b).abs() > 1e-12);
        s = next;
        if !moved {
            return (0..runs.len()).all(|r| simulate(&runs[r].blocks, p, s[r]).is_some());
        }
    }
    false
}

fn any_bijection(runs: &[OracleRun], p: &EnergyParams, full: bool) -> bool {
    let k = runs.len();
    let link_ok = |r: usize, q: usize| {
        day_ok(p, p.horizon + runs[q].first().start_time - runs[r].last().end_time)
    };
    fn rec(
        r: usize,
        used: &mut Vec<bool>,
        succ: &mut Vec<usize>,
        ok: &dyn Fn(usize, usize) -> bool,
        done: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if r == used.len() {
            return done(succ);
        }
        for q in 0..used.len() {
            if !used[q] && ok(r, q) {
                used[q] = true;
                succ[r] = q;
                if rec(r + 1, used, succ, ok, done) {
                    return true;
                }
                used[q] = false;
            }
        }
        false
    }
    rec(
        0,
        &mut vec![false; k],
        &mut vec![0; k],
        &link_ok,
        &mut |succ| next_day_ok(runs, succ, p, full),
    )
}

/// Optimal chaining cost by enumeration, or `None` when nothing is
/// repeatable.
pub fn brute_force_bcp(blocks: &[Block], p: &EnergyParams, full: bool) -> Option<f64> {
    let n = blocks.len();
    if n == 0 {
        return Some(0.0);
    }
    let mut sorted: Vec<&Block> = blocks.iter().collect();
    sorted.sort_by_key(|b| (b.start_time, b.id));
    let cap = p.battery_cap;

    let mut candidates: Vec<(f64, Vec<Vec<usize>>)> = Vec::new();
    for_each_partition(n, |labels, groups| {
        let parts = groups_of(labels, groups);
        let mut cost = groups as f64 * p.vehicle_cost;
        for g in &parts {
            for w in g.windows(2) {
                let gap = sorted[w[1]].start_time - sorted[w[0]].end_time;
                if !day_ok(p, gap) {
                    return;
                }
                cost += p.layover_weight * gap as f64;
            }
            let run: Vec<&Block> = g.iter().map(|&k| sorted[k]).collect();
            if simulate(&run, p, cap).is_none() {
                return;
            }
        }
        candidates.push((cost, parts));
    });
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (cost, parts) in candidates {
        let runs: Vec<OracleRun> = parts
            .iter()
            .map(|g| OracleRun {
                blocks: g.iter().map(|&k| sorted[k]).collect(),
            })
            .collect();
        if any_bijection(&runs, p, full) {
            return Some(cost);
        }
    }
    None
}

/// Block set for oracle comparisons. Varies the shape so that battery,
/// daytime charging and overnight links all bind on some instances.
pub fn random_bcp<R: Rng>(rng: &mut R, n: usize) -> (Vec<Block>, EnergyParams) {
    let mut p = EnergyParams::default();
    match rng.gen_range(0..4) {
        0 => {}
        1 => {
            p.rate_day = rng.gen_range(0.1..1.0);
            p.rate_night = rng.gen_range(0.05..p.rate_day);
        }
        2 => p.layover_min = rng.gen_range(0..1800),
        _ => {
            p.layover_max = Some(rng.gen_range(3600..30_000));
            p.vehicle_cost = 20_000.0;
        }
    }
    let blocks = (1..=n as u32)
        .map(|id| {
            let start = rng.gen_range(0..75_000);
            let dur = rng.gen_range(1200..24_000);
            let night = ((p.horizon - dur) as f64 * p.rate_night) as i64;
            let draw = rng
                .gen_range(dur / 4..=dur)
                .min(p.battery_cap as i64)
                .min(night.max(1));
            Block::synthetic(id, start, start + dur, draw)
        })
        .collect();
    (blocks, p)
}
