//! One line per acceptance criterion. Runs without the libtest harness so
//! the lines always show; exits nonzero if any criterion fails.

#[path = "../../core/tests/oracle/mod.rs"]
mod oracle;
#[path = "../../core/tests/fixtures/mod.rs"]
mod fixtures;

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use evsched::bcp::{
    build_instance, replay_next_day, solve_exact_with, validate, write_lp, write_lp_file,
    BcpInstance, ChainSolution, EnergyParams, ExactConfig,
};
use evsched::dac::{kl_bisect, partition_blocks, solve_dac, BlockGraph, DacConfig};
use evsched::greedy::solve_greedy;
use evsched::metrics::{replacement_ratio, schedule_efficiency};
use evsched::sdvsp::solve_sdvsp;
use evsched::synth::{random_blocks, rng, BlockGen};
use evsched::BcpError;
use rand::Rng;

const SDVSP_TOL: f64 = 0.0;
const BCP_TOL: f64 = 1e-6;
const LP_TOL: f64 = 1e-6;
const RATE_TOL: f64 = 1e-3;
const TIME_TOL: f64 = 1e-6;
const SDVSP_BUDGET: Duration = Duration::from_secs(60);
const BCP_BUDGET: Duration = Duration::from_secs(600);
const GREEDY_BUDGET: Duration = Duration::from_secs(60);
const KL_BUDGET: Duration = Duration::from_secs(30);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn exact(inst: &BcpInstance, full: bool) -> Result<ChainSolution, BcpError> {
    let cfg = ExactConfig {
        full_initial: full,
        block_limit: None,
        ..ExactConfig::default()
    };
    solve_exact_with(inst, &cfg).map(|o| o.solution)
}

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn sdvsp_exactness() -> Outcome {
    let t = Instant::now();
    let mut r = rng(1);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = r.gen_range(1..=8);
        let inst = oracle::random_sdvsp(&mut r, n);
        let got = solve_sdvsp(&inst).objective;
        worst = worst.max((got - oracle::brute_force_sdvsp(&inst)).abs());
    }
    let el = t.elapsed();
    outcome(
        worst <= SDVSP_TOL && el < SDVSP_BUDGET,
        format!("200 instances, max |diff| {worst}, {:.2} s", el.as_secs_f64()),
    )
}

fn bcp_exactness() -> Outcome {
    let t = Instant::now();
    let mut r = rng(2);
    let (mut worst, mut mismatched, mut infeasible) = (0.0f64, 0, 0);
    for _ in 0..100 {
        let n = r.gen_range(1..=10);
        let full = r.gen_bool(0.5);
        let (blocks, p) = oracle::random_bcp(&mut r, n);
        let want = oracle::brute_force_bcp(&blocks, &p, full);
        let inst = build_instance(blocks, p).unwrap();
        match (exact(&inst, full), want) {
            (Ok(s), Some(w)) => worst = worst.max((s.objective - w).abs()),
            (Err(BcpError::Infeasible { .. }), None) => infeasible += 1,
            _ => mismatched += 1,
        }
    }
    let el = t.elapsed();
    outcome(
        worst <= BCP_TOL && mismatched == 0 && el < BCP_BUDGET,
        format!(
            "100 instances ({infeasible} infeasible in both), max |diff| {worst:e}, {mismatched} status mismatches, {:.1} s",
            el.as_secs_f64()
        ),
    )
}

/// Solves every `.lp` in `dir` with HiGHS; `None` when it is not importable.
fn highs_objectives(dir: &Path) -> Option<Vec<(String, String)>> {
    let script = r#"
import sys, glob, os
import highspy
for f in sorted(glob.glob(os.path.join(sys.argv[1], "*.lp"))):
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", 0.0)
    h.readModel(f)
    h.run()
    st = h.getModelStatus()
    name = os.path.basename(f)[:-3]
    if st == highspy.HighsModelStatus.kOptimal:
        print(name, repr(h.getInfo().objective_function_value))
    elif st == highspy.HighsModelStatus.kInfeasible:
        print(name, "infeasible")
    else:
        print(name, "status", st)
"#;
    let out = Command::new("python3")
        .arg("-c")
        .arg(script)
        .arg(dir)
        .output()
        .ok()?;
    if !out.status.success() {
        return None;
    }
    Some(
        String::from_utf8(out.stdout)
            .ok()?
            .lines()
            .filter_map(|l| l.split_once(' '))
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect(),
    )
}

fn cross_model() -> Outcome {
    let golden = workspace().join("crates/core/tests/golden");
    let tmp = tempfile::tempdir().unwrap();
    let mut byte_diffs = 0;
    let mut ours = Vec::new();
    for f in fixtures::lp_fixtures() {
        let inst = build_instance(f.blocks, f.params).unwrap();
        let path = tmp.path().join(format!("{}.lp", f.name));
        write_lp_file(&inst, &path, true, f.full_initial).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let want = std::fs::read_to_string(golden.join(format!("{}.lp", f.name))).unwrap_or_default();
        if text != want || write_lp(&inst, false, f.full_initial)
            != std::fs::read_to_string(golden.join(format!("{}.general.lp", f.name))).unwrap_or_default()
        {
            byte_diffs += 1;
        }
        ours.push((f.name, exact(&inst, f.full_initial).map(|s| s.objective)));
    }
    let Some(theirs) = highs_objectives(tmp.path()) else {
        return outcome(
            byte_diffs == 0,
            format!("20 fixtures, {byte_diffs} golden byte diffs; external solver unavailable, skipped"),
        );
    };
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for ((name, ours), (hname, h)) in ours.iter().zip(&theirs) {
        let ok = match (ours, h.parse::<f64>()) {
            _ if name != hname => false,
            (Ok(v), Ok(w)) => {
                worst = worst.max((v - w).abs());
                (v - w).abs() <= LP_TOL
            }
            (Err(BcpError::Infeasible { .. }), Err(_)) => h == "infeasible",
            _ => false,
        };
        if !ok {
            bad.push(name.clone());
        }
    }
    outcome(
        byte_diffs == 0 && bad.is_empty() && theirs.len() == ours.len(),
        format!(
            "20 fixtures, {byte_diffs} golden byte diffs, HiGHS max |diff| {worst:e}, mismatches {bad:?}"
        ),
    )
}

fn greedy_feasibility() -> Outcome {
    let p = EnergyParams::default();
    let mut violations = 0;
    let mut failures = 0;
    for (k, size) in [10, 50, 200, 1000].into_iter().enumerate() {
        for rep in 0..250u64 {
            let inst = build_instance(random_blocks(1000 * k as u64 + rep, size, &p), p).unwrap();
            match solve_greedy(&inst) {
                Ok(s) => violations += validate(&inst, &s, true).violations.len(),
                Err(_) => failures += 1,
            }
        }
    }
    outcome(
        violations == 0 && failures == 0,
        format!("1000 instances, {violations} violations, {failures} solver errors"),
    )
}

fn greedy_vs_exact() -> Outcome {
    // Some(true) when greedy undercuts exact; None when either fails.
    let below_exact = |inst: &BcpInstance| match (solve_greedy(inst), exact(inst, true)) {
        (Ok(g), Ok(e)) => Some(g.objective < e.objective - BCP_TOL),
        _ => None,
    };
    let mut results: Vec<bool> = fixtures::lp_fixtures()
        .into_iter()
        .filter_map(|f| below_exact(&build_instance(f.blocks, f.params).unwrap()))
        .collect();
    let mut r = rng(5);
    while results.len() < 120 {
        let n = r.gen_range(1..=10);
        let (blocks, p) = oracle::random_bcp(&mut r, n);
        results.extend(below_exact(&build_instance(blocks, p).unwrap()));
    }
    let checked = results.len();
    let below = results.iter().filter(|&&b| b).count();

    // Benchmark artifact over 500 random 20-block instances. A few of them
    // take the exact search several seconds, so it runs under a time limit
    // and gaps on those are measured against the best incumbent.
    let dir = workspace().join("artifacts");
    std::fs::create_dir_all(&dir).unwrap();
    let summary = dir.join("bench_greedy_20.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_evsched"))
        .args(["bench", "--synthetic-blocks", "--sizes", "20", "--reps", "500", "--seed", "0", "--time-limit-s", "1", "--out"])
        .arg(&summary)
        .arg("--per-rep")
        .arg(dir.join("bench_greedy_20_reps.csv"))
        .output()
        .unwrap();
    let gap = std::fs::read_to_string(&summary)
        .ok()
        .and_then(|csv| {
            let mut lines = csv.lines();
            let header: Vec<&str> = lines.next()?.split(',').collect();
            let row: Vec<&str> = lines.next()?.split(',').collect();
            let col = header.iter().position(|h| *h == "greedy_gap")?;
            row[col].parse::<f64>().ok()
        });
    let gap_ok = out.status.success() && gap.is_some_and(|g| g.is_finite() && g >= 0.0);
    outcome(
        below == 0 && gap_ok,
        format!(
            "{checked} fixtures, {below} with greedy below exact; mean greedy gap on 500 x 20 blocks {}% (artifacts/bench_greedy_20.csv)",
            gap.map_or("n/a".into(), |g| format!("{g:.3}"))
        ),
    )
}

fn dac_properties() -> Outcome {
    let p = EnergyParams::default();
    // (a)
    let mut a_diff = 0;
    for seed in 0..20 {
        let n = 4 + seed as usize % 9;
        let inst = build_instance(random_blocks(seed, n, &p), p).unwrap();
        let cfg = DacConfig {
            subproblem_cap: n,
            ..DacConfig::default()
        };
        if solve_dac(&inst, &cfg).ok() != exact(&inst, true).ok() {
            a_diff += 1;
        }
    }
    // (b) and (c)
    let (mut b_bad, mut c_bad) = (0, 0);
    let mut r = rng(6);
    for seed in 0..500 {
        let n = r.gen_range(8..=40);
        let cap = r.gen_range(3..=10);
        let blocks = BlockGen::default().blocks(&mut r, n, &p);
        let inst = build_instance(blocks, p).unwrap();
        let cfg = DacConfig {
            subproblem_cap: cap,
            seed,
            ..DacConfig::default()
        };
        match solve_dac(&inst, &cfg) {
            Ok(s) => {
                if !validate(&inst, &s, true).feasible {
                    b_bad += 1;
                }
                if n <= 14 {
                    if let Ok(e) = exact(&inst, true) {
                        if s.objective < e.objective - BCP_TOL {
                            c_bad += 1;
                        }
                    }
                }
            }
            Err(_) => b_bad += 1,
        }
    }
    // (d)
    let inst = build_instance(random_blocks(42, 100, &p), p).unwrap();
    let parts = partition_blocks(&inst, 20, 0).map(|x| x.parts.len()).unwrap_or(0);
    outcome(
        a_diff == 0 && b_bad == 0 && c_bad == 0 && parts == 8,
        format!(
            "(a) {a_diff}/20 differ from exact; (b) {b_bad}/500 merged failures; (c) {c_bad} below exact; (d) 100 blocks at cap 20 -> {parts} parts"
        ),
    )
}

fn parameters() -> Outcome {
    let p = EnergyParams::default();
    let pass = (p.rate_day - 2.0455).abs() <= RATE_TOL
        && (p.rate_night - 0.5682).abs() <= RATE_TOL
        && p.battery_kwh == 440.0;
    outcome(
        pass,
        format!(
            "rate_day {:.4}, rate_night {:.4}, battery {} kWh",
            p.rate_day, p.rate_night, p.battery_kwh
        ),
    )
}

/// Every method's output on one instance, where it has one.
fn all_outputs(inst: &BcpInstance, full: bool) -> Vec<ChainSolution> {
    let dac = DacConfig {
        subproblem_cap: 4,
        ..DacConfig::default()
    };
    [exact(inst, full).ok(), solve_greedy(inst).ok(), solve_dac(inst, &dac).ok()]
        .into_iter()
        .flatten()
        .collect()
}

fn day_two() -> Outcome {
    let mut r = rng(8);
    let (mut outputs, mut violations) = (0, 0);
    for _ in 0..300 {
        let n = r.gen_range(1..=10);
        let full = r.gen_bool(0.5);
        let (blocks, p) = oracle::random_bcp(&mut r, n);
        let inst = build_instance(blocks, p).unwrap();
        for s in all_outputs(&inst, full) {
            outputs += 1;
            violations += replay_next_day(&inst, &s).violations.len();
        }
    }
    outcome(
        violations == 0 && outputs > 300,
        format!("300 instances, {outputs} solver outputs replayed, {violations} violations"),
    )
}

fn metrics_closure() -> Outcome {
    let mut r = rng(9);
    let (mut checked, mut worst) = (0, 0.0f64);
    for _ in 0..100 {
        let n = r.gen_range(1..=30);
        let p = EnergyParams::default();
        let blocks = BlockGen::default().blocks(&mut r, n, &p);
        let inst = build_instance(blocks, p).unwrap();
        for s in all_outputs(&inst, true) {
            let e = schedule_efficiency(&s, &inst).unwrap();
            worst = worst.max((e.accounted_s() - e.vehicles as f64 * p.horizon as f64).abs());
            checked += 1;
        }
    }
    let ratio = replacement_ratio(16, 0, 10).ok();
    outcome(
        worst <= TIME_TOL && ratio == Some(1.6),
        format!("{checked} solutions, max identity error {worst:e}; replacement_ratio(16, 0, 10) = {ratio:?}"),
    )
}

fn performance() -> Outcome {
    let p = EnergyParams::default();
    let inst = build_instance(random_blocks(10, 10_000, &p), p).unwrap();
    let t = Instant::now();
    let ok = solve_greedy(&inst).is_ok();
    let greedy = t.elapsed();

    let mut r = rng(11);
    let n = 10_000;
    let mut edges = std::collections::HashSet::new();
    while edges.len() < 50_000 {
        let a = r.gen_range(0..n);
        let b = r.gen_range(0..n);
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let mut edges: Vec<_> = edges.into_iter().collect();
    edges.sort_unstable();
    let g = BlockGraph::new((0..n as u32).collect(), edges);
    let t = Instant::now();
    let split = kl_bisect(&g, 0);
    let kl = t.elapsed();
    let balanced = split.as_ref().is_ok_and(|s| s.a.len() == n / 2 && s.b.len() == n / 2);
    outcome(
        ok && greedy < GREEDY_BUDGET && balanced && kl < KL_BUDGET,
        format!(
            "greedy on 10000 blocks {:.2} s; K-L on 10000 vertices / 50000 edges {:.2} s, cut {}",
            greedy.as_secs_f64(),
            kl.as_secs_f64(),
            split.map_or(0, |s| s.cut)
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("SDVSP exactness", sdvsp_exactness),
        ("BCP exactness", bcp_exactness),
        ("cross-model LP check", cross_model),
        ("greedy feasibility", greedy_feasibility),
        ("greedy vs exact", greedy_vs_exact),
        ("DaC properties", dac_properties),
        ("parameter derivations", parameters),
        ("next-day replay", day_two),
        ("metrics closure", metrics_closure),
        ("performance guard", performance),
    ];
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!(
            "criterion {:>2} {}: {} ({})",
            k + 1,
            if o.pass { "PASS" } else { "FAIL" },
            name,
            o.detail
        );
        if !o.pass {
            failed.push(k + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
