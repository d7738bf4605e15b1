//! Depth-first branch-and-bound over block chainings.
//!
//! Blocks are placed in departure order. Each block either extends an open
//! run over a same-day arc or dispatches a new vehicle, so every chaining is
//! reached exactly once. Charging is always maximal, which costs nothing in
//! the objective and only loosens later SOC constraints. Complete chainings
//! must then pass the next-day pairing check.

use std::time::{Duration, Instant};

use super::relax::{feasible_pairs, relaxed_cost};
use super::{assemble, plan_next_day, BcpInstance, ChainSolution, NextDayPlan, RunProfile};
use crate::error::BcpError;
use crate::greedy::{greedy_runs, OvernightWindow};

/// Largest instance `solve_exact` accepts unless configured otherwise.
pub const DEFAULT_EXACT_BLOCK_LIMIT: usize = 20;

/// The assignment bound is skipped on suffixes shorter than this.
const BOUND_MIN_SUFFIX: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactConfig {
    pub time_limit: Option<Duration>,
    /// Force every run to start on a full battery.
    pub full_initial: bool,
    /// `None` lifts the size guard.
    pub block_limit: Option<usize>,
    /// Seed the incumbent with the greedy chaining.
    pub warm_start: bool,
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig {
            time_limit: None,
            full_initial: false,
            block_limit: Some(DEFAULT_EXACT_BLOCK_LIMIT),
            warm_start: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactOutcome {
    pub solution: ChainSolution,
    /// Battery-free lower bound at the root.
    pub root_bound: f64,
    pub nodes: u64,
}

impl ExactOutcome {
    /// Relative distance between incumbent and root bound; zero once optimal.
    pub fn mip_gap(&self) -> f64 {
        let obj = self.solution.objective;
        if self.solution.optimal || obj <= 0.0 {
            0.0
        } else {
            ((obj - self.root_bound) / obj).max(0.0)
        }
    }
}

pub fn solve_exact(
    inst: &BcpInstance,
    time_limit_s: f64,
    assume_full_initial: bool,
) -> Result<ChainSolution, BcpError> {
    let cfg = ExactConfig {
        time_limit: Some(Duration::from_secs_f64(time_limit_s.max(0.0))),
        full_initial: assume_full_initial,
        ..ExactConfig::default()
    };
    solve_exact_with(inst, &cfg).map(|o| o.solution)
}

struct Incumbent {
    cost: f64,
    runs: Vec<Vec<usize>>,
    plan: NextDayPlan,
}

struct Search<'a> {
    inst: &'a BcpInstance,
    full: bool,
    runs: Vec<Vec<usize>>,
    profiles: Vec<RunProfile>,
    cost: f64,
    /// `cheap[k]`: sum over blocks `k..` of their cheapest way in.
    cheap: Vec<f64>,
    pair_ok: Vec<bool>,
    best: Option<Incumbent>,
    deadline: Option<Instant>,
    nodes: u64,
    timed_out: bool,
}

const EPS: f64 = 1e-9;

impl Search<'_> {
    fn bound(&self, k: usize) -> f64 {
        let n = self.inst.len();
        let cheap = self.cost + self.cheap[k];
        let Some(best) = &self.best else {
            return cheap;
        };
        if cheap >= best.cost - EPS || n - k < BOUND_MIN_SUFFIX {
            return cheap;
        }
        cheap.max(self.cost + relaxed_cost(self.inst, &self.profiles, k, &self.pair_ok))
    }

    fn dfs(&mut self, k: usize) {
        if self.timed_out {
            return;
        }
        self.nodes += 1;
        if self.nodes % 256 == 1 {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.timed_out = true;
                    return;
                }
            }
        }
        let inst = self.inst;
        if k == inst.len() {
            if self.best.as_ref().is_none_or(|b| self.cost < b.cost - EPS) {
                if let Some(plan) = plan_next_day(inst, &self.profiles, self.full) {
                    self.best = Some(Incumbent {
                        cost: self.cost,
                        runs: self.runs.clone(),
                        plan,
                    });
                }
            }
            return;
        }
        if let Some(best) = &self.best {
            if self.bound(k) >= best.cost - EPS {
                return;
            }
        }

        // (cost, run to extend or None for a new vehicle, extended profile)
        let mut options: Vec<(f64, Option<usize>, RunProfile)> = Vec::new();
        for (r, p) in self.profiles.iter().enumerate() {
            if inst.is_day_arc(p.last, k) {
                if let Some(np) = p.extend(inst, k) {
                    options.push((inst.arc_cost(p.last, k), Some(r), np));
                }
            }
        }
        options.push((inst.params.vehicle_cost, None, RunProfile::start(inst, k)));
        options.sort_by(|a, b| a.0.total_cmp(&b.0));

        for (c, slot, np) in options {
            self.cost += c;
            match slot {
                Some(r) => {
                    let old = std::mem::replace(&mut self.profiles[r], np);
                    self.runs[r].push(k);
                    self.dfs(k + 1);
                    self.runs[r].pop();
                    self.profiles[r] = old;
                }
                None => {
                    self.profiles.push(np);
                    self.runs.push(vec![k]);
                    self.dfs(k + 1);
                    self.runs.pop();
                    self.profiles.pop();
                }
            }
            self.cost -= c;
            if self.timed_out {
                return;
            }
        }
    }
}

fn cheapest_entry(inst: &BcpInstance, pair_ok: &[bool]) -> Vec<f64> {
    let n = inst.len();
    let mut suffix = vec![0.0; n + 1];
    for j in (0..n).rev() {
        let entry = (0..j)
            .filter(|&i| pair_ok[i * n + j])
            .map(|i| inst.arc_cost(i, j))
            .fold(inst.params.vehicle_cost, f64::min);
        suffix[j] = suffix[j + 1] + entry;
    }
    suffix
}

/// Block reported when no chaining works: the first one that cannot even
/// feed a single-block run the next morning.
fn first_unservable(inst: &BcpInstance, full: bool) -> u32 {
    let cap = inst.params.battery_cap;
    for i in 0..inst.len() {
        let end = cap - inst.consumption(i);
        let ok = (0..inst.len()).any(|j| {
            let need = if full { cap } else { inst.consumption(j) };
            inst.is_night_arc(i, j) && end + inst.night_charge(i, j) >= need - super::TOLERANCE
        });
        if !ok {
            return inst.block(i).id;
        }
    }
    inst.block(0).id
}

pub fn solve_exact_with(inst: &BcpInstance, cfg: &ExactConfig) -> Result<ExactOutcome, BcpError> {
    let n = inst.len();
    if let Some(limit) = cfg.block_limit {
        if n > limit {
            return Err(BcpError::TooLarge { blocks: n, limit });
        }
    }
    let start = Instant::now();
    let pair_ok = feasible_pairs(inst);
    let root_bound = relaxed_cost(inst, &[], 0, &pair_ok);
    let mut search = Search {
        inst,
        full: cfg.full_initial,
        runs: Vec::new(),
        profiles: Vec::new(),
        cost: 0.0,
        cheap: cheapest_entry(inst, &pair_ok),
        pair_ok,
        best: None,
        deadline: cfg.time_limit.map(|d| start + d),
        nodes: 0,
        timed_out: false,
    };
    if cfg.warm_start && n > 0 {
        if let Ok(runs) = greedy_runs(inst, OvernightWindow::Consistent) {
            let profiles: Option<Vec<_>> =
                runs.iter().map(|r| RunProfile::from_run(inst, r)).collect();
            if let Some(profiles) = profiles {
                if let Some(plan) = plan_next_day(inst, &profiles, cfg.full_initial) {
                    search.best = Some(Incumbent {
                        cost: inst.runs_cost(&runs),
                        runs,
                        plan,
                    });
                }
            }
        }
    }
    search.dfs(0);
    let optimal = !search.timed_out;
    let nodes = search.nodes;
    match search.best {
        Some(best) => {
            let solution = assemble(inst, &best.runs, &best.plan, optimal);
            let root_bound = if optimal { solution.objective } else { root_bound };
            Ok(ExactOutcome {
                solution,
                root_bound: root_bound.min(best.cost),
                nodes,
            })
        }
        None if n == 0 => Ok(ExactOutcome {
            solution: ChainSolution {
                optimal: true,
                ..ChainSolution::default()
            },
            root_bound: 0.0,
            nodes,
        }),
        None if !optimal => Err(BcpError::TimeLimitWithoutIncumbent),
        None => Err(BcpError::Infeasible {
            block: first_unservable(inst, cfg.full_initial),
        }),
    }
}
