//! Kernighan-Lin bisection with unit edge weights.
//!
//! Each pass tentatively swaps the best unlocked pair until one side runs
//! out, then keeps the prefix of swaps with the largest positive total gain.
//! Gains live in ordered sets so the best pair is found by scanning both
//! sides from the top and stopping once no remaining pair can beat the best
//! one seen.

use std::cmp::Reverse;
use std::collections::BTreeSet;

use crate::error::BcpError;

/// Upper bound on improvement passes.
const MAX_PASSES: usize = 64;

/// Undirected simple graph over block ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockGraph {
    pub vertices: Vec<u32>,
    /// Adjacency by vertex position, sorted and without self-loops.
    pub adj: Vec<Vec<usize>>,
}

impl BlockGraph {
    /// Builds a graph from position pairs; duplicates and self-loops are
    /// dropped.
    pub fn new(vertices: Vec<u32>, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); vertices.len()];
        for (a, b) in edges {
            if a != b {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        BlockGraph { vertices, adj }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges with endpoints on different sides.
    pub fn cut(&self, side: &[bool]) -> usize {
        self.adj
            .iter()
            .enumerate()
            .map(|(v, list)| list.iter().filter(|&&w| w > v && side[w] != side[v]).count())
            .sum()
    }

    /// Subgraph induced by vertex positions `keep`.
    pub fn induced(&self, keep: &[usize]) -> BlockGraph {
        let mut pos = vec![usize::MAX; self.len()];
        for (k, &v) in keep.iter().enumerate() {
            pos[v] = k;
        }
        let mut edges = Vec::new();
        for (k, &v) in keep.iter().enumerate() {
            for &w in &self.adj[v] {
                if pos[w] != usize::MAX && pos[w] > k {
                    edges.push((k, pos[w]));
                }
            }
        }
        BlockGraph::new(keep.iter().map(|&v| self.vertices[v]).collect(), edges)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bisection {
    /// Vertex positions on each side, ascending.
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub cut: usize,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Balanced starting split: vertices ordered by a seeded hash of their id,
/// then dealt alternately to A and B.
fn initial_split(g: &BlockGraph, seed: u64) -> Vec<bool> {
    let mut order: Vec<usize> = (0..g.len()).collect();
    order.sort_by_key(|&v| (splitmix64(seed ^ splitmix64(g.vertices[v] as u64)), g.vertices[v]));
    let mut side = vec![false; g.len()];
    for (k, &v) in order.iter().enumerate() {
        side[v] = k % 2 == 1;
    }
    side
}

/// `true` means side B.
fn pass(g: &BlockGraph, side: &mut [bool]) -> i64 {
    let n = g.len();
    let mut d: Vec<i64> = (0..n)
        .map(|v| {
            g.adj[v]
                .iter()
                .map(|&w| if side[w] != side[v] { 1 } else { -1 })
                .sum()
        })
        .collect();
    let mut sets: [BTreeSet<(Reverse<i64>, usize)>; 2] = [BTreeSet::new(), BTreeSet::new()];
    for v in 0..n {
        sets[side[v] as usize].insert((Reverse(d[v]), v));
    }
    let mut swaps: Vec<(usize, usize)> = Vec::new();
    let mut gains: Vec<i64> = Vec::new();

    while !sets[0].is_empty() && !sets[1].is_empty() {
        let mut best: Option<(i64, usize, usize)> = None;
        'outer: for &(Reverse(da), a) in &sets[0] {
            if let Some((bg, _, _)) = best {
                // Even a non-adjacent partner with the top gain of B cannot win.
                let top_b = sets[1].iter().next().unwrap().0 .0;
                if da + top_b <= bg {
                    break 'outer;
                }
            }
            for &(Reverse(db), b) in &sets[1] {
                if let Some((bg, _, _)) = best {
                    if da + db <= bg {
                        break;
                    }
                }
                let c = if g.adj[a].binary_search(&b).is_ok() { 1 } else { 0 };
                let gain = da + db - 2 * c;
                if best.is_none_or(|(bg, _, _)| gain > bg) {
                    best = Some((gain, a, b));
                }
                if c == 0 {
                    // Later partners have no larger gain.
                    break;
                }
            }
        }
        let (gain, a, b) = best.expect("both sides non-empty");
        sets[0].remove(&(Reverse(d[a]), a));
        sets[1].remove(&(Reverse(d[b]), b));
        // Move a to B and b to A, updating unlocked neighbours.
        for (moved, to_b) in [(a, true), (b, false)] {
            side[moved] = to_b;
            for &w in &g.adj[moved] {
                let s = side[w] as usize;
                let locked = !sets[s].contains(&(Reverse(d[w]), w));
                let delta = if side[w] == to_b { -2 } else { 2 };
                if locked {
                    d[w] += delta;
                } else {
                    sets[s].remove(&(Reverse(d[w]), w));
                    d[w] += delta;
                    sets[s].insert((Reverse(d[w]), w));
                }
            }
        }
        swaps.push((a, b));
        gains.push(gain);
    }

    let mut best_k = 0;
    let (mut run, mut best_gain) = (0i64, 0i64);
    for (k, g) in gains.iter().enumerate() {
        run += g;
        if run > best_gain {
            best_gain = run;
            best_k = k + 1;
        }
    }
    for &(a, b) in &swaps[best_k..] {
        side[a] = false;
        side[b] = true;
    }
    best_gain
}

/// Bisects `g` into halves differing in size by at most one.
pub fn kl_bisect(g: &BlockGraph, seed: u64) -> Result<Bisection, BcpError> {
    if g.len() < 2 {
        return Err(BcpError::TooFewVertices(g.len()));
    }
    let mut side = initial_split(g, seed);
    for _ in 0..MAX_PASSES {
        if pass(g, &mut side) <= 0 {
            break;
        }
    }
    let a = (0..g.len()).filter(|&v| !side[v]).collect();
    let b = (0..g.len()).filter(|&v| side[v]).collect();
    Ok(Bisection {
        a,
        b,
        cut: g.cut(&side),
    })
}
