//! LP text is pinned byte for byte. Regenerate with `EVSCHED_BLESS=1`.
//! `objectives.txt` holds optima found by an external MILP solver on the
//! linearized files; the exact search must agree with them.

mod fixtures;

use std::collections::HashMap;
use std::path::PathBuf;

use evsched::bcp::{build_instance, solve_exact_with, write_lp, ExactConfig};
use evsched::BcpError;

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

#[test]
fn lp_text_matches_golden() {
    let bless = std::env::var_os("EVSCHED_BLESS").is_some();
    for f in fixtures::lp_fixtures() {
        let inst = build_instance(f.blocks, f.params).unwrap();
        for (linear, suffix) in [(true, "lp"), (false, "general.lp")] {
            let text = write_lp(&inst, linear, f.full_initial);
            let path = golden_dir().join(format!("{}.{suffix}", f.name));
            if bless {
                std::fs::write(&path, &text).unwrap();
            } else {
                let want = std::fs::read_to_string(&path)
                    .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
                assert!(text == want, "{} differs from golden", path.display());
            }
        }
    }
}

#[test]
fn exact_matches_external_optima() {
    let text = std::fs::read_to_string(golden_dir().join("objectives.txt")).unwrap();
    let want: HashMap<&str, &str> = text
        .lines()
        .filter_map(|l| l.split_once(' '))
        .collect();
    let fx = fixtures::lp_fixtures();
    assert_eq!(want.len(), fx.len());
    for f in fx {
        let inst = build_instance(f.blocks, f.params).unwrap();
        let cfg = ExactConfig {
            full_initial: f.full_initial,
            ..ExactConfig::default()
        };
        match (solve_exact_with(&inst, &cfg), want[f.name.as_str()]) {
            (Err(BcpError::Infeasible { .. }), "infeasible") => {}
            (Ok(o), w) => {
                let w: f64 = w.parse().unwrap_or_else(|_| panic!("{}: solver found {}", f.name, o.solution.objective));
                assert!((o.solution.objective - w).abs() < 1e-6, "{}: {} vs {w}", f.name, o.solution.objective);
            }
            (got, w) => panic!("{}: {got:?} vs {w}", f.name),
        }
    }
}
