//! Seeded random instances for tests and benchmarks.
//!
//! All generators draw from ChaCha8 seeded with a `u64`, so the same seed
//! gives the same instance on every platform.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bcp::EnergyParams;
use crate::schedule_data::{Stop, Trip};
use crate::sdvsp::Block;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape of random block sets.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockGen {
    /// Latest departure, seconds.
    pub latest_start: i64,
    pub min_duration: i64,
    pub max_duration: i64,
    /// Consumption as a share of block duration.
    pub min_share: f64,
    pub max_share: f64,
    /// Consumption never exceeds this share of the battery.
    pub max_battery_share: f64,
}

impl Default for BlockGen {
    fn default() -> Self {
        BlockGen {
            latest_start: 72_000,
            min_duration: 1800,
            max_duration: 20_000,
            min_share: 0.4,
            max_share: 0.95,
            max_battery_share: 0.98,
        }
    }
}

impl BlockGen {
    /// Blocks with ids `1..=n`. Every block fits the battery and can be
    /// recharged overnight to serve itself again.
    pub fn blocks<R: Rng>(&self, rng: &mut R, n: usize, params: &EnergyParams) -> Vec<Block> {
        let max_draw = (params.battery_cap * self.max_battery_share).floor() as i64;
        (1..=n as u32)
            .map(|id| {
                let start = rng.gen_range(0..=self.latest_start);
                let dur = rng.gen_range(self.min_duration..=self.max_duration);
                let share = rng.gen_range(self.min_share..=self.max_share);
                let night = ((params.horizon - dur) as f64 * params.rate_night).floor() as i64;
                let draw = ((dur as f64 * share) as i64).min(max_draw).min(night).max(1);
                Block::synthetic(id, start, start + dur, draw)
            })
            .collect()
    }
}

/// Random blocks with the default shape.
pub fn random_blocks(seed: u64, n: usize, params: &EnergyParams) -> Vec<Block> {
    BlockGen::default().blocks(&mut rng(seed), n, params)
}

/// Random trips between stops scattered in a box of about 20 km around
/// downtown Chicago, departing between 05:00 and 22:00.
pub fn random_trips<R: Rng>(rng: &mut R, n: usize) -> Vec<Trip> {
    let (lat0, lon0) = (41.88, -87.63);
    let stop = |name: String, rng: &mut R| {
        Stop::new(
            name,
            lat0 + rng.gen_range(-0.09..0.09),
            lon0 + rng.gen_range(-0.12..0.12),
        )
        .expect("coordinates inside the box are valid")
    };
    (0..n)
        .map(|k| {
            let id = format!("t{k:05}");
            let o = stop(format!("{id}:o"), rng);
            let d = stop(format!("{id}:d"), rng);
            let start = rng.gen_range(18_000..79_200);
            let dur = rng.gen_range(900..3600);
            let route = format!("r{}", rng.gen_range(0..5));
            Trip::new(id, o, d, start, start + dur, route).expect("positive duration")
        })
        .collect()
}
