//! Constraint-by-constraint checker for chaining solutions.
//!
//! Tags name the constraint family that failed: `cons-5`/`cons-6` for the
//! block partition, `set-E`/`set-C` for arc membership, `cons-7` to `cons-15`
//! for the SOC and overnight rules, `cons-23` for the full-battery start,
//! plus `nonneg`, `objective` and `day2` (second-horizon replay).

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{ArcKey, BcpInstance, ChainSolution, Node, TOLERANCE};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub constraint: &'static str,
    /// Block id or arc key the violation refers to.
    pub at: String,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        ValidationReport {
            feasible: violations.is_empty(),
            violations,
        }
    }

    pub fn count(&self, tag: &str) -> usize {
        self.violations.iter().filter(|v| v.constraint == tag).count()
    }
}

struct Sink(Vec<Violation>);

impl Sink {
    fn push(&mut self, constraint: &'static str, at: impl ToString, magnitude: f64) {
        self.0.push(Violation {
            constraint,
            at: at.to_string(),
            magnitude,
        });
    }

    /// Records `lhs <= rhs` failures beyond tolerance.
    fn le(&mut self, constraint: &'static str, at: impl ToString, lhs: f64, rhs: f64) {
        if lhs > rhs + TOLERANCE {
            self.push(constraint, at, lhs - rhs);
        }
    }

    fn eq(&mut self, constraint: &'static str, at: impl ToString, lhs: f64, rhs: f64) {
        if (lhs - rhs).abs() > TOLERANCE {
            self.push(constraint, at, (lhs - rhs).abs());
        }
    }
}

pub fn validate(
    inst: &BcpInstance,
    sol: &ChainSolution,
    assume_full_initial: bool,
) -> ValidationReport {
    let p = &inst.params;
    let cap = p.battery_cap;
    let mut out = Sink(Vec::new());

    // Partition of the block set.
    let mut seen: BTreeMap<u32, usize> = BTreeMap::new();
    for run in &sol.runs {
        if run.is_empty() {
            out.push("cons-5", "empty run", 1.0);
        }
        for &b in run {
            *seen.entry(b).or_default() += 1;
        }
    }
    for (&b, &n) in &seen {
        if inst.index_of(b).is_none() {
            out.push("cons-5", b, 1.0);
        } else if n > 1 {
            out.push("cons-6", b, (n - 1) as f64);
        }
    }
    for blk in inst.blocks() {
        if !seen.contains_key(&blk.id) {
            out.push("cons-5", blk.id, 1.0);
        }
    }
    if !out.0.is_empty() {
        return ValidationReport::from_violations(out.0);
    }
    let idx = |b: u32| inst.index_of(b).expect("checked above");

    let mut used: BTreeSet<ArcKey> = BTreeSet::new();
    for run in &sol.runs {
        let first_soc = sol.soc.get(&run[0]).copied();
        used.insert(ArcKey::pull_out(run[0]));
        if assume_full_initial {
            out.eq("cons-23", run[0], first_soc.unwrap_or(f64::NAN), cap);
        }
        if let (Some(b), Some(&v)) = (first_soc, sol.arc_soc.get(&ArcKey::pull_out(run[0]))) {
            out.eq("cons-8", run[0], b, v);
            out.le("cons-10", ArcKey::pull_out(run[0]), v, cap);
        }
        for w in run.windows(2) {
            let (i, j) = (idx(w[0]), idx(w[1]));
            let key = ArcKey::blocks(w[0], w[1]);
            used.insert(key);
            if !inst.is_day_arc(i, j) {
                out.push("set-E", key, inst.gap(i, j) as f64);
                continue;
            }
            let u = sol.day_charge.get(&key).copied().unwrap_or(0.0);
            out.le("nonneg", key, -u, 0.0);
            out.le("cons-10", key, u, inst.day_charge_cap(i, j));
            let (Some(&bi), Some(&bj)) = (sol.soc.get(&w[0]), sol.soc.get(&w[1])) else {
                continue;
            };
            let v = (bi - inst.consumption(i) + u).max(0.0);
            if let Some(&stored) = sol.arc_soc.get(&key) {
                out.eq("cons-7", key, stored, v);
            }
            out.eq("cons-8", w[1], bj, v);
        }
        let last = run[run.len() - 1];
        let key = ArcKey::pull_in(last);
        used.insert(key);
        if let Some(&u) = sol.day_charge.get(&key) {
            out.eq("cons-11", key, u, 0.0);
        }
        if let (Some(&bi), Some(&v)) = (sol.soc.get(&last), sol.arc_soc.get(&key)) {
            out.eq("cons-7", key, v, (bi - inst.consumption(idx(last))).max(0.0));
        }
    }

    // Charges on arcs the runs do not use must vanish.
    for (key, &u) in &sol.day_charge {
        if used.contains(key) {
            continue;
        }
        let tag = if key.to == Node::Sink { "cons-11" } else { "cons-10" };
        out.eq(tag, key, u, 0.0);
    }

    for blk in inst.blocks() {
        match sol.soc.get(&blk.id) {
            None => out.push("cons-9", blk.id, f64::INFINITY),
            Some(&b) => {
                out.le("cons-9", blk.id, blk.consumption as f64, b);
                out.le("cons-9", blk.id, b, cap);
            }
        }
    }

    check_next_day(inst, sol, &mut out);

    let runs: Vec<Vec<usize>> = sol
        .runs
        .iter()
        .map(|r| r.iter().map(|&b| idx(b)).collect())
        .collect();
    let objective = inst.runs_cost(&runs);
    if (objective - sol.objective).abs() > TOLERANCE * objective.abs().max(1.0) {
        out.push("objective", "total", (objective - sol.objective).abs());
    }
    ValidationReport::from_violations(out.0)
}

/// End SOC of a run as recorded in the solution.
fn recorded_end_soc(inst: &BcpInstance, sol: &ChainSolution, last: u32) -> Option<f64> {
    let b = *sol.soc.get(&last)?;
    Some(b - inst.consumption(inst.index_of(last)?))
}

fn check_next_day(inst: &BcpInstance, sol: &ChainSolution, out: &mut Sink) {
    let cap = inst.params.battery_cap;
    let starts: BTreeSet<u32> = sol.runs.iter().map(|r| r[0]).collect();
    let ends: BTreeSet<u32> = sol.runs.iter().map(|r| r[r.len() - 1]).collect();
    let mut fed: BTreeMap<u32, usize> = BTreeMap::new();
    for &e in &ends {
        match sol.next_day.get(&e) {
            None => out.push("cons-15", e, 1.0),
            Some(&q) if !starts.contains(&q) => out.push("cons-14", q, 1.0),
            Some(&q) => *fed.entry(q).or_default() += 1,
        }
    }
    for (&from, _) in sol.next_day.iter().filter(|(k, _)| !ends.contains(k)) {
        out.push("cons-15", from, 1.0);
    }
    for &s in &starts {
        let n = fed.get(&s).copied().unwrap_or(0);
        if n != 1 {
            out.push("cons-14", s, (n as f64 - 1.0).abs());
        }
    }
    for (&r, &q) in &sol.next_day {
        if !(ends.contains(&r) && starts.contains(&q)) {
            continue;
        }
        let (i, j) = (inst.index_of(r).unwrap(), inst.index_of(q).unwrap());
        let key = ArcKey::blocks(r, q);
        if !inst.is_night_arc(i, j) {
            out.push("set-C", key, inst.night_gap(i, j) as f64);
            continue;
        }
        let (Some(end), Some(&bq)) = (recorded_end_soc(inst, sol, r), sol.soc.get(&q)) else {
            continue;
        };
        let v = cap.min(end + inst.night_charge(i, j));
        if let Some(&stored) = sol.overnight_soc.get(&key) {
            out.eq("cons-12", key, stored, v);
        }
        out.le("cons-13", key, bq, v);
    }
}

/// Replays a second horizon: every run starts at the overnight SOC its
/// predecessor leaves it, reuses the stored day charges, and must keep each
/// block served. Violations are tagged `day2`.
pub fn replay_next_day(inst: &BcpInstance, sol: &ChainSolution) -> ValidationReport {
    let cap = inst.params.battery_cap;
    let mut out = Sink(Vec::new());
    let feeder: BTreeMap<u32, u32> = sol.next_day.iter().map(|(&r, &q)| (q, r)).collect();
    for run in &sol.runs {
        let Some(&pred) = feeder.get(&run[0]) else {
            out.push("day2", run[0], f64::INFINITY);
            continue;
        };
        let (Some(end), Some(i), Some(j)) = (
            recorded_end_soc(inst, sol, pred),
            inst.index_of(pred),
            inst.index_of(run[0]),
        ) else {
            out.push("day2", run[0], f64::INFINITY);
            continue;
        };
        let mut x = cap.min(end + inst.night_charge(i, j));
        for (k, &b) in run.iter().enumerate() {
            let bi = inst.index_of(b).expect("run blocks belong to the instance");
            let need = inst.consumption(bi);
            out.le("day2", b, need, x);
            x -= need;
            if let Some(&next) = run.get(k + 1) {
                let u = sol.day_charge.get(&ArcKey::blocks(b, next)).copied().unwrap_or(0.0);
                x = cap.min(x + u);
            }
        }
    }
    ValidationReport::from_violations(out.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bcp::{build_instance, EnergyParams};
    use crate::sdvsp::Block;

    fn two_block() -> BcpInstance {
        build_instance(
            vec![
                Block::synthetic(1, 0, 4000, 3000),
                Block::synthetic(2, 5000, 9000, 3000),
            ],
            EnergyParams::default(),
        )
        .unwrap()
    }

    fn chained() -> ChainSolution {
        let mut sol = ChainSolution {
            runs: vec![vec![1, 2]],
            objective: 51_000.0,
            ..Default::default()
        };
        sol.soc.insert(1, 7200.0);
        sol.day_charge.insert(ArcKey::blocks(1, 2), 2045.0);
        sol.soc.insert(2, 6245.0);
        sol.next_day.insert(2, 1);
        sol
    }

    #[test]
    fn empty_is_feasible() {
        let inst = build_instance(vec![], EnergyParams::default()).unwrap();
        let r = validate(&inst, &ChainSolution::default(), true);
        assert!(r.feasible);
    }

    #[test]
    fn hand_built_chain_passes() {
        let inst = two_block();
        let r = validate(&inst, &chained(), true);
        assert!(r.feasible, "{:?}", r.violations);
        assert!(replay_next_day(&inst, &chained()).feasible);
    }

    #[test]
    fn over_charging_is_flagged() {
        let inst = two_block();
        let mut sol = chained();
        sol.day_charge.insert(ArcKey::blocks(1, 2), 5000.0);
        sol.soc.insert(2, 7200.0);
        let r = validate(&inst, &sol, true);
        assert_eq!(r.count("cons-10"), 1);
        assert!(r.count("cons-8") == 1);
    }

    #[test]
    fn missing_and_duplicate_blocks() {
        let inst = two_block();
        let mut sol = chained();
        sol.runs = vec![vec![1], vec![1]];
        let r = validate(&inst, &sol, false);
        assert_eq!(r.count("cons-5"), 1);
        assert_eq!(r.count("cons-6"), 1);
    }

    #[test]
    fn single_run_overnight_fixture() {
        // Full start, 3000 drawn, window 86400 - 4000 = 82400 s.
        let inst = build_instance(vec![Block::synthetic(1, 0, 4000, 3000)], EnergyParams::default())
            .unwrap();
        let mut sol = ChainSolution {
            runs: vec![vec![1]],
            objective: 50_000.0,
            ..Default::default()
        };
        sol.soc.insert(1, 7200.0);
        sol.next_day.insert(1, 1);
        assert!(validate(&inst, &sol, true).feasible);

        // A 80 000 s block drawing 7000 leaves 6400 s overnight: 200 + 3636 < 7200.
        let inst = build_instance(
            vec![Block::synthetic(1, 0, 80_000, 7000)],
            EnergyParams::default(),
        )
        .unwrap();
        let r = validate(&inst, &sol, true);
        assert_eq!(r.count("cons-13"), 1);
    }
}
