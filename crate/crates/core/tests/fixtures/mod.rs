//! Small chaining instances shared by the LP golden tests and acceptance.
#![allow(dead_code)]

use evsched::bcp::EnergyParams;
use evsched::sdvsp::Block;
use evsched::synth::{rng, BlockGen};

pub struct LpFixture {
    pub name: String,
    pub blocks: Vec<Block>,
    pub params: EnergyParams,
    pub full_initial: bool,
}

/// Twenty instances of at most ten blocks. The last two have no repeatable
/// schedule.
pub fn lp_fixtures() -> Vec<LpFixture> {
    let mut out = Vec::new();
    let mut r = rng(77);
    for k in 0..18 {
        let mut p = EnergyParams::default();
        match k % 3 {
            0 => {}
            1 => p.layover_min = 300,
            _ => {
                p.rate_day = 0.5;
                p.rate_night = 0.2;
            }
        }
        let n = 2 + k % 9;
        let gen = BlockGen {
            latest_start: 50_000,
            ..BlockGen::default()
        };
        out.push(LpFixture {
            name: format!("lp_{k:02}"),
            blocks: gen.blocks(&mut r, n, &p),
            params: p,
            full_initial: k % 2 == 0,
        });
    }
    // A near-all-day block cannot refill overnight, alone or paired.
    out.push(LpFixture {
        name: "lp_18".into(),
        blocks: vec![Block::synthetic(1, 0, 80_000, 7000)],
        params: EnergyParams::default(),
        full_initial: false,
    });
    out.push(LpFixture {
        name: "lp_19".into(),
        blocks: vec![
            Block::synthetic(1, 0, 80_000, 7000),
            Block::synthetic(2, 1000, 4000, 2000),
        ],
        params: EnergyParams::default(),
        full_initial: true,
    });
    out
}
