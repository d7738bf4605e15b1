//! Next-day operability: pairing every run's end with a run start on the
//! following horizon.
//!
//! With a fixed full battery at every run start, a pairing is a plain
//! bipartite matching. With variable starting SOC the link r -> q imposes
//!
//! ```text
//! s_q <= min(cap, end_level_r + g_rq)
//! s_q - s_r <= end_offset_r + g_rq
//! min_start_q <= s_q <= cap
//! ```
//!
//! which is a system of difference constraints, feasible iff its constraint
//! graph has no negative cycle. Pairings are searched depth-first with that
//! test applied to every partial assignment.

use super::{BcpInstance, RunProfile, TOLERANCE};

/// Upper bound on partial-assignment checks before the search gives up.
const SEARCH_BUDGET: usize = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct NextDayPlan {
    /// `successor[r]` is the run whose first block follows run `r`'s last
    /// block on the next horizon.
    pub successor: Vec<usize>,
    /// Starting SOC chosen for each run.
    pub start_soc: Vec<f64>,
}

pub(crate) fn plan_next_day(
    inst: &BcpInstance,
    runs: &[RunProfile],
    full_initial: bool,
) -> Option<NextDayPlan> {
    if runs.is_empty() {
        return Some(NextDayPlan {
            successor: Vec::new(),
            start_soc: Vec::new(),
        });
    }
    if full_initial {
        plan_full(inst, runs)
    } else {
        plan_variable(inst, runs)
    }
}

fn plan_full(inst: &BcpInstance, runs: &[RunProfile]) -> Option<NextDayPlan> {
    let cap = inst.params.battery_cap;
    let n = runs.len();
    if runs.iter().any(|r| r.min_start > cap + TOLERANCE) {
        return None;
    }
    let ok = |r: usize, q: usize| {
        let (last, first) = (runs[r].last, runs[q].first);
        inst.is_night_arc(last, first)
            && runs[r].end_soc(inst, cap) + inst.night_charge(last, first) >= cap - TOLERANCE
    };
    let candidates: Vec<Vec<usize>> = (0..n)
        .map(|r| {
            std::iter::once(r)
                .chain((0..n).filter(move |&q| q != r))
                .filter(|&q| ok(r, q))
                .collect()
        })
        .collect();
    let successor = perfect_matching(&candidates)?;
    Some(NextDayPlan {
        successor,
        start_soc: vec![cap; n],
    })
}

/// Kuhn's augmenting-path matching; `candidates[r]` in preference order.
fn perfect_matching(candidates: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = candidates.len();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    fn augment(
        r: usize,
        candidates: &[Vec<usize>],
        owner: &mut [Option<usize>],
        seen: &mut [bool],
    ) -> bool {
        for &q in &candidates[r] {
            if seen[q] {
                continue;
            }
            seen[q] = true;
            if owner[q].is_none_or(|o| augment(o, candidates, owner, seen)) {
                owner[q] = Some(r);
                return true;
            }
        }
        false
    }
    for r in 0..n {
        let mut seen = vec![false; n];
        if !augment(r, candidates, &mut owner, &mut seen) {
            return None;
        }
    }
    let mut successor = vec![0; n];
    for (q, o) in owner.iter().enumerate() {
        successor[o.expect("perfect matching covers every run")] = q;
    }
    Some(successor)
}

#[derive(Debug, Clone, Copy)]
struct Link {
    /// Bound on the successor's starting SOC.
    upper: f64,
    /// Bound on `s_q - s_r`.
    slack: f64,
}

fn link(inst: &BcpInstance, runs: &[RunProfile], r: usize, q: usize) -> Option<Link> {
    let (last, first) = (runs[r].last, runs[q].first);
    if !inst.is_night_arc(last, first) {
        return None;
    }
    let cap = inst.params.battery_cap;
    let g = inst.night_charge(last, first);
    let upper = cap.min(runs[r].end_level(inst) + g);
    let slack = runs[r].end_offset(inst) + g;
    let lo_q = runs[q].min_start;
    let alone = if r == q {
        slack >= -TOLERANCE && lo_q <= upper + TOLERANCE
    } else {
        lo_q <= upper + TOLERANCE && lo_q <= cap + slack + TOLERANCE
    };
    alone.then_some(Link { upper, slack })
}

/// Greatest starting SOCs satisfying the constraints of the assigned links,
/// or `None` on a negative cycle. Node `n` is the zero reference.
fn solve_differences(
    runs: &[RunProfile],
    cap: f64,
    assigned: &[(usize, usize, Link)],
) -> Option<Vec<f64>> {
    let n = runs.len();
    let mut edges: Vec<(usize, usize, f64)> = Vec::with_capacity(2 * n + 2 * assigned.len());
    for (r, p) in runs.iter().enumerate() {
        edges.push((n, r, cap));
        edges.push((r, n, -p.min_start));
    }
    for &(r, q, l) in assigned {
        edges.push((n, q, l.upper));
        edges.push((r, q, l.slack));
    }
    let mut dist = vec![f64::INFINITY; n + 1];
    dist[n] = 0.0;
    for round in 0..=n + 1 {
        let mut changed = false;
        for &(u, v, w) in &edges {
            if dist[u].is_finite() && dist[u] + w < dist[v] - 1e-9 {
                dist[v] = dist[u] + w;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        if round == n + 1 {
            return None;
        }
    }
    // Tolerate rounding below the reference node.
    if dist[n] < -TOLERANCE {
        return None;
    }
    let shift = dist[n];
    Some(dist[..n].iter().map(|d| (d - shift).min(cap)).collect())
}

fn plan_variable(inst: &BcpInstance, runs: &[RunProfile]) -> Option<NextDayPlan> {
    let n = runs.len();
    let cap = inst.params.battery_cap;
    if runs.iter().any(|r| r.min_start > cap + TOLERANCE) {
        return None;
    }
    let links: Vec<Vec<Option<Link>>> = (0..n)
        .map(|r| (0..n).map(|q| link(inst, runs, r, q)).collect())
        .collect();

    // Every run closing on itself decouples the constraints.
    if (0..n).all(|r| links[r][r].is_some()) {
        let assigned: Vec<_> = (0..n).map(|r| (r, r, links[r][r].unwrap())).collect();
        if let Some(start_soc) = solve_differences(runs, cap, &assigned) {
            return Some(NextDayPlan {
                successor: (0..n).collect(),
                start_soc,
            });
        }
    }

    let candidates: Vec<Vec<usize>> = (0..n)
        .map(|r| {
            let mut c: Vec<usize> = (0..n).filter(|&q| links[r][q].is_some()).collect();
            // Prefer the link leaving the most room for the successor.
            c.sort_by(|&a, &b| {
                let la = links[r][a].unwrap();
                let lb = links[r][b].unwrap();
                (lb.upper - runs[b].min_start)
                    .total_cmp(&(la.upper - runs[a].min_start))
                    .then(a.cmp(&b))
            });
            c
        })
        .collect();
    perfect_matching(&candidates)?;

    let mut search = PairSearch {
        runs,
        cap,
        links: &links,
        candidates: &candidates,
        used: vec![false; n],
        assigned: Vec::with_capacity(n),
        budget: SEARCH_BUDGET,
    };
    let start_soc = search.dfs(0)?;
    let mut successor = vec![0; n];
    for &(r, q, _) in &search.assigned {
        successor[r] = q;
    }
    Some(NextDayPlan {
        successor,
        start_soc,
    })
}

struct PairSearch<'a> {
    runs: &'a [RunProfile],
    cap: f64,
    links: &'a [Vec<Option<Link>>],
    candidates: &'a [Vec<usize>],
    used: Vec<bool>,
    assigned: Vec<(usize, usize, Link)>,
    budget: usize,
}

impl PairSearch<'_> {
    fn dfs(&mut self, r: usize) -> Option<Vec<f64>> {
        if r == self.runs.len() {
            return solve_differences(self.runs, self.cap, &self.assigned);
        }
        for k in 0..self.candidates[r].len() {
            let q = self.candidates[r][k];
            if self.used[q] {
                continue;
            }
            if self.budget == 0 {
                log::warn!("next-day pairing search budget exhausted; treating runs as unpairable");
                return None;
            }
            self.budget -= 1;
            let l = self.links[r][q].expect("candidates carry links");
            self.assigned.push((r, q, l));
            if solve_differences(self.runs, self.cap, &self.assigned).is_some() {
                self.used[q] = true;
                if let Some(s) = self.dfs(r + 1) {
                    return Some(s);
                }
                self.used[q] = false;
            }
            self.assigned.pop();
        }
        None
    }
}
