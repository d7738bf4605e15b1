//! Single-depot vehicle scheduling: chaining trips into depot-to-depot blocks.
//!
//! The model picks, for every trip, exactly one predecessor (another trip or
//! the depot) and exactly one successor (another trip or the depot). Those two
//! families of equalities form an assignment polytope, so the model is solved
//! exactly as a min-cost flow:
//!
//! ```text
//! S -> out(i)          cap 1, cost 0
//! out(i) -> in(j)      cap 1, cost deadhead(i,j) + W * layover(i,j)
//! out(i) -> depot      cap 1, cost pull-in(i)
//! depot -> in(j)       cap 1, cost K + pull-out(j)
//! in(j) -> T           cap 1, cost 0
//! ```
//!
//! Every unit of flow through the depot node is one block.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::DataError;
use crate::mcf::MinCostFlow;
use crate::schedule_data::{deadhead_time, Depot, TravelModel, Trip};

/// Costs are scaled to integer milliseconds before entering the flow solver.
const COST_SCALE: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdvspParams {
    /// Block generation cost K in seconds.
    pub block_cost: f64,
    /// Layover weight W.
    pub layover_weight: f64,
}

impl Default for SdvspParams {
    fn default() -> Self {
        SdvspParams {
            block_cost: 50_000.0,
            layover_weight: 1.0,
        }
    }
}

/// A temporally feasible connection from trip `from` to trip `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripArc {
    pub from: usize,
    pub to: usize,
    pub deadhead: i64,
    pub layover: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdvspInstance {
    pub trips: Vec<Trip>,
    pub depot: Option<Depot>,
    pub arcs: Vec<TripArc>,
    /// Pull-out deadhead from the depot to each trip's origin.
    pub depot_out: Vec<i64>,
    /// Pull-in deadhead from each trip's destination to the depot.
    pub depot_in: Vec<i64>,
    pub params: SdvspParams,
}

/// A depot-to-depot sequence of trips served by one bus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub id: u32,
    pub trip_ids: Vec<String>,
    /// Depot departure, including the pull-out deadhead.
    pub start_time: i64,
    /// Depot arrival, including the pull-in deadhead.
    pub end_time: i64,
    /// Driving time (revenue + deadhead); the battery draw in seconds.
    pub consumption: i64,
    pub revenue_time: i64,
    pub deadhead_time: i64,
    pub intertrip_layover: i64,
}

impl Block {
    /// A block with no trip detail, all driving counted as revenue.
    pub fn synthetic(id: u32, start_time: i64, end_time: i64, consumption: i64) -> Self {
        assert!(end_time > start_time, "block must have positive duration");
        assert!(
            (0..=end_time - start_time).contains(&consumption),
            "consumption must fit within the block duration"
        );
        Block {
            id,
            trip_ids: Vec::new(),
            start_time,
            end_time,
            consumption,
            revenue_time: consumption,
            deadhead_time: 0,
            intertrip_layover: end_time - start_time - consumption,
        }
    }

    pub fn duration(&self) -> i64 {
        self.end_time - self.start_time
    }
}

impl SdvspInstance {
    /// Builds the trip connection arcs for trips served out of `depot`.
    ///
    /// Arc (i, j) exists when trip j can start after trip i ends plus the
    /// deadhead between them. The layover is the slack that remains.
    pub fn build(trips: Vec<Trip>, depot: &Depot, model: &TravelModel) -> Self {
        let depot_out = trips
            .iter()
            .map(|t| deadhead_time(&depot.location, &t.origin, model))
            .collect();
        let depot_in = trips
            .iter()
            .map(|t| deadhead_time(&t.destination, &depot.location, model))
            .collect();
        let dh = |i: usize, j: usize| deadhead_time(&trips[i].destination, &trips[j].origin, model);
        let arcs = connection_arcs(&trips, dh);
        SdvspInstance {
            trips,
            depot: Some(depot.clone()),
            arcs,
            depot_out,
            depot_in,
            params: SdvspParams::default(),
        }
    }

    /// Builds an instance from explicit deadhead times instead of geography.
    pub fn from_deadheads(
        trips: Vec<Trip>,
        deadhead: impl Fn(usize, usize) -> i64,
        depot_out: Vec<i64>,
        depot_in: Vec<i64>,
    ) -> Self {
        assert_eq!(depot_out.len(), trips.len());
        assert_eq!(depot_in.len(), trips.len());
        let arcs = connection_arcs(&trips, deadhead);
        SdvspInstance {
            trips,
            depot: None,
            arcs,
            depot_out,
            depot_in,
            params: SdvspParams::default(),
        }
    }

    pub fn with_params(mut self, params: SdvspParams) -> Self {
        self.params = params;
        self
    }

    fn arc_cost(&self, arc: &TripArc) -> f64 {
        arc.deadhead as f64 + self.params.layover_weight * arc.layover as f64
    }
}

fn connection_arcs(trips: &[Trip], deadhead: impl Fn(usize, usize) -> i64) -> Vec<TripArc> {
    let n = trips.len();
    let mut arcs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let dh = deadhead(i, j);
            let layover = trips[j].start_time - trips[i].end_time - dh;
            if layover >= 0 {
                arcs.push(TripArc {
                    from: i,
                    to: j,
                    deadhead: dh,
                    layover,
                });
            }
        }
    }
    arcs
}

/// Convenience wrapper around [`SdvspInstance::build`].
pub fn build_arcs(trips: Vec<Trip>, depot: &Depot, model: &TravelModel) -> SdvspInstance {
    SdvspInstance::build(trips, depot, model)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdvspSolution {
    /// Blocks ordered by depot departure; ids are 1-based in that order.
    pub blocks: Vec<Block>,
    pub objective: f64,
}

fn scaled(cost: f64) -> i64 {
    (cost * COST_SCALE).round() as i64
}

/// Solves the trip chaining model to optimality.
pub fn solve_sdvsp(instance: &SdvspInstance) -> SdvspSolution {
    let n = instance.trips.len();
    if n == 0 {
        return SdvspSolution {
            blocks: Vec::new(),
            objective: 0.0,
        };
    }
    let (source, sink, depot) = (0, 1, 2);
    let out = |i: usize| 3 + i;
    let inn = |j: usize| 3 + n + j;

    let mut g = MinCostFlow::new(3 + 2 * n);
    for i in 0..n {
        g.add_edge(source, out(i), 1, 0);
    }
    let arc_edges: Vec<_> = instance
        .arcs
        .iter()
        .map(|a| g.add_edge(out(a.from), inn(a.to), 1, scaled(instance.arc_cost(a))))
        .collect();
    for i in 0..n {
        g.add_edge(out(i), depot, 1, scaled(instance.depot_in[i] as f64));
    }
    for j in 0..n {
        g.add_edge(
            depot,
            inn(j),
            1,
            scaled(instance.params.block_cost + instance.depot_out[j] as f64),
        );
    }
    for j in 0..n {
        g.add_edge(inn(j), sink, 1, 0);
    }
    let (flow, _) = g.run(source, sink, n as i64);
    assert_eq!(flow as usize, n, "assignment network always admits a full flow");

    let mut succ: Vec<Option<usize>> = vec![None; n];
    let mut has_pred = vec![false; n];
    for (arc, &e) in instance.arcs.iter().zip(&arc_edges) {
        if g.flow(e) == 1 {
            assert!(succ[arc.from].is_none() && !has_pred[arc.to]);
            succ[arc.from] = Some(arc.to);
            has_pred[arc.to] = true;
        }
    }
    let mut chains = Vec::new();
    for start in (0..n).filter(|&j| !has_pred[j]) {
        let mut chain = vec![start];
        let mut cur = start;
        while let Some(next) = succ[cur] {
            chain.push(next);
            cur = next;
        }
        chains.push(chain);
    }
    assert_eq!(
        chains.iter().map(Vec::len).sum::<usize>(),
        n,
        "every trip must sit in exactly one block"
    );
    blocks_from_chains(instance, &chains)
}

/// Materialises blocks and the objective value for a given chaining.
///
/// Each chain lists trip indices in service order, and consecutive trips must
/// be joined by an arc of the instance.
pub fn blocks_from_chains(instance: &SdvspInstance, chains: &[Vec<usize>]) -> SdvspSolution {
    let arc_of = |i: usize, j: usize| {
        instance
            .arcs
            .iter()
            .find(|a| a.from == i && a.to == j)
            .unwrap_or_else(|| panic!("trips {i} -> {j} are not connectable"))
    };
    let mut objective = 0.0;
    let mut blocks = Vec::with_capacity(chains.len());
    for chain in chains {
        let first = chain[0];
        let last = *chain.last().expect("chains are non-empty");
        let mut revenue = 0;
        let mut deadhead = instance.depot_out[first] + instance.depot_in[last];
        let mut layover = 0;
        objective += instance.params.block_cost
            + (instance.depot_out[first] + instance.depot_in[last]) as f64;
        for (k, &t) in chain.iter().enumerate() {
            revenue += instance.trips[t].duration();
            if k + 1 < chain.len() {
                let arc = arc_of(t, chain[k + 1]);
                deadhead += arc.deadhead;
                layover += arc.layover;
                objective += instance.arc_cost(arc);
            }
        }
        blocks.push(Block {
            id: 0,
            trip_ids: chain.iter().map(|&t| instance.trips[t].id.clone()).collect(),
            start_time: instance.trips[first].start_time - instance.depot_out[first],
            end_time: instance.trips[last].end_time + instance.depot_in[last],
            consumption: revenue + deadhead,
            revenue_time: revenue,
            deadhead_time: deadhead,
            intertrip_layover: layover,
        });
    }
    blocks.sort_by(|a, b| {
        (a.start_time, a.end_time, &a.trip_ids).cmp(&(b.start_time, b.end_time, &b.trip_ids))
    });
    for (k, b) in blocks.iter_mut().enumerate() {
        b.id = k as u32 + 1;
    }
    SdvspSolution { blocks, objective }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub block_cost: f64,
    pub layover_weight: f64,
    pub blocks: usize,
    pub within_range: usize,
    pub share_within_range: f64,
}

/// Solves the model over a grid of (K, W) values and reports which share of
/// the resulting blocks fits within `range_limit` seconds of driving.
/// `None` means no limit.
pub fn sweep_block_control(
    instance: &SdvspInstance,
    block_costs: &[f64],
    layover_weights: &[f64],
    range_limit: Option<i64>,
) -> Vec<SweepRow> {
    let mut rows = Vec::with_capacity(block_costs.len() * layover_weights.len());
    for &k in block_costs {
        for &w in layover_weights {
            let inst = instance.clone().with_params(SdvspParams {
                block_cost: k,
                layover_weight: w,
            });
            let sol = solve_sdvsp(&inst);
            let within = sol
                .blocks
                .iter()
                .filter(|b| range_limit.is_none_or(|r| b.consumption <= r))
                .count();
            let share = if sol.blocks.is_empty() {
                1.0
            } else {
                within as f64 / sol.blocks.len() as f64
            };
            rows.push(SweepRow {
                block_cost: k,
                layover_weight: w,
                blocks: sol.blocks.len(),
                within_range: within,
                share_within_range: share,
            });
        }
    }
    rows
}

#[derive(Debug, Serialize, Deserialize)]
struct BlockRecord {
    block_id: u32,
    trip_ids: String,
    start_time_s: i64,
    end_time_s: i64,
    consumption_s: i64,
    revenue_s: i64,
    deadhead_s: i64,
    layover_s: i64,
}

impl From<&Block> for BlockRecord {
    fn from(b: &Block) -> Self {
        BlockRecord {
            block_id: b.id,
            trip_ids: b.trip_ids.join(";"),
            start_time_s: b.start_time,
            end_time_s: b.end_time,
            consumption_s: b.consumption,
            revenue_s: b.revenue_time,
            deadhead_s: b.deadhead_time,
            layover_s: b.intertrip_layover,
        }
    }
}

impl From<BlockRecord> for Block {
    fn from(r: BlockRecord) -> Self {
        Block {
            id: r.block_id,
            trip_ids: if r.trip_ids.is_empty() {
                Vec::new()
            } else {
                r.trip_ids.split(';').map(str::to_string).collect()
            },
            start_time: r.start_time_s,
            end_time: r.end_time_s,
            consumption: r.consumption_s,
            revenue_time: r.revenue_s,
            deadhead_time: r.deadhead_s,
            intertrip_layover: r.layover_s,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DataError + '_ {
    move |source| DataError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_blocks_csv(path: &Path, blocks: &[Block]) -> Result<(), DataError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut wtr = csv::Writer::from_writer(file);
    for b in blocks {
        wtr.serialize(BlockRecord::from(b))
            .map_err(|source| DataError::Csv {
                file: path.display().to_string(),
                source,
            })?;
    }
    wtr.flush().map_err(io_err(path))
}

/// One JSON object per line, same fields as the CSV.
pub fn write_blocks_jsonl(path: &Path, blocks: &[Block]) -> Result<(), DataError> {
    let mut file = File::create(path).map_err(io_err(path))?;
    for b in blocks {
        let line = serde_json::to_string(&BlockRecord::from(b)).expect("plain record serialises");
        writeln!(file, "{line}").map_err(io_err(path))?;
    }
    Ok(())
}

pub fn read_blocks_csv(path: &Path) -> Result<Vec<Block>, DataError> {
    let file = File::open(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            DataError::MissingFile(path.display().to_string())
        } else {
            DataError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    let mut rdr = csv::Reader::from_reader(file);
    rdr.deserialize::<BlockRecord>()
        .map(|r| {
            r.map(Block::from).map_err(|source| DataError::Csv {
                file: path.display().to_string(),
                source,
            })
        })
        .collect()
}

pub fn read_blocks_jsonl(path: &Path) -> Result<Vec<Block>, DataError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut blocks = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: BlockRecord = serde_json::from_str(&line)
            .map_err(|e| DataError::invalid(path.display().to_string(), e.to_string()))?;
        blocks.push(rec.into());
    }
    Ok(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule_data::Stop;

    fn explicit(
        times: &[(i64, i64)],
        deadhead: impl Fn(usize, usize) -> i64,
        pull_out: i64,
        pull_in: i64,
        params: SdvspParams,
    ) -> SdvspInstance {
        let s = Stop::new("x", 0.0, 0.0).unwrap();
        let trips: Vec<Trip> = times
            .iter()
            .enumerate()
            .map(|(k, &(a, b))| Trip::new(format!("t{k}"), s.clone(), s.clone(), a, b, "r").unwrap())
            .collect();
        let n = trips.len();
        SdvspInstance::from_deadheads(trips, deadhead, vec![pull_out; n], vec![pull_in; n])
            .with_params(params)
    }

    #[test]
    fn arc_feasibility_rule() {
        let inst = explicit(&[(0, 1000), (2000, 2500)], |_, _| 600, 0, 0, SdvspParams::default());
        assert_eq!(
            inst.arcs,
            vec![TripArc {
                from: 0,
                to: 1,
                deadhead: 600,
                layover: 400
            }]
        );
        let inst = explicit(&[(0, 1000), (2000, 2500)], |_, _| 1200, 0, 0, SdvspParams::default());
        assert!(inst.arcs.is_empty());
    }

    #[test]
    fn geographic_build_has_no_self_arcs() {
        let depot = Depot::new("d", 41.9, -87.6).unwrap();
        let a = Stop::new("a", 41.90, -87.60).unwrap();
        let trips = vec![
            Trip::new("t0", a.clone(), a.clone(), 0, 100, "r").unwrap(),
            Trip::new("t1", a.clone(), a, 5000, 5100, "r").unwrap(),
        ];
        let inst = build_arcs(trips, &depot, &TravelModel::default());
        assert!(inst.arcs.iter().all(|a| a.from != a.to));
        assert_eq!(inst.arcs.len(), 1);
        assert_eq!(inst.depot_out, vec![0, 0]);
    }

    #[test]
    fn single_trip_single_block() {
        let inst = explicit(&[(1000, 2000)], |_, _| 0, 300, 200, SdvspParams::default());
        let sol = solve_sdvsp(&inst);
        assert_eq!(sol.blocks.len(), 1);
        assert_eq!(sol.objective, 50_000.0 + 300.0 + 200.0);
        let b = &sol.blocks[0];
        assert_eq!((b.start_time, b.end_time), (700, 2200));
        assert_eq!(b.consumption, 1000 + 500);
    }

    #[test]
    fn compatible_pair_chains_when_k_is_large() {
        // Chaining costs deadhead 400 + layover 600 = 1000; splitting costs
        // K + pull-out + pull-in = 50 200 extra.
        let inst = explicit(&[(0, 1000), (2000, 3000)], |_, _| 400, 100, 100, SdvspParams::default());
        let sol = solve_sdvsp(&inst);
        assert_eq!(sol.blocks.len(), 1);
        assert_eq!(sol.objective, 50_000.0 + 200.0 + 1000.0);
        let b = &sol.blocks[0];
        assert_eq!(b.revenue_time, 2000);
        assert_eq!(b.deadhead_time, 600);
        assert_eq!(b.intertrip_layover, 600);
        assert_eq!(b.consumption + b.intertrip_layover, b.duration());
    }

    #[test]
    fn disconnected_trips_get_own_blocks() {
        let inst = explicit(&[(0, 1000), (500, 1500)], |_, _| 0, 0, 0, SdvspParams::default());
        assert!(inst.arcs.is_empty());
        assert_eq!(solve_sdvsp(&inst).blocks.len(), 2);
    }

    #[test]
    fn zero_block_cost_splits_when_chaining_costs() {
        let params = SdvspParams {
            block_cost: 0.0,
            layover_weight: 1.0,
        };
        let inst = explicit(&[(0, 1000), (2000, 3000), (4000, 5000)], |_, _| 100, 0, 0, params);
        let sol = solve_sdvsp(&inst);
        assert_eq!(sol.blocks.len(), 3);
        assert_eq!(sol.objective, 0.0);
    }

    #[test]
    fn sweep_shares() {
        let inst = explicit(&[(0, 3000), (4000, 7000)], |_, _| 0, 0, 0, SdvspParams::default());
        let rows = sweep_block_control(&inst, &[0.0, 1e6], &[0.0], None);
        assert!(rows.iter().all(|r| r.share_within_range == 1.0));

        let rows = sweep_block_control(&inst, &[1e6], &[0.0], Some(5000));
        assert_eq!(rows[0].blocks, 1);
        assert_eq!(rows[0].share_within_range, 0.0);
        let rows = sweep_block_control(&inst, &[0.0], &[1.0], Some(5000));
        assert_eq!(rows[0].blocks, 2);
        assert_eq!(rows[0].share_within_range, 1.0);
    }

    #[test]
    fn block_files_round_trip() {
        let inst = explicit(&[(0, 1000), (2000, 3000), (100, 900)], |_, _| 50, 10, 10, SdvspParams::default());
        let sol = solve_sdvsp(&inst);
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("blocks.csv");
        let jsonl = dir.path().join("blocks.jsonl");
        write_blocks_csv(&csv, &sol.blocks).unwrap();
        write_blocks_jsonl(&jsonl, &sol.blocks).unwrap();
        assert_eq!(read_blocks_csv(&csv).unwrap(), sol.blocks);
        assert_eq!(read_blocks_jsonl(&jsonl).unwrap(), sol.blocks);
    }
}
