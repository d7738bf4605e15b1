//! Successive-shortest-path min-cost flow with Johnson potentials.
//!
//! Used as the exact engine behind the trip assignment model. Costs are
//! integers; edges are explored in insertion order and relaxations are strict,
//! so among equal-cost paths the one using lower edge indices is kept.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

const INF: i64 = i64::MAX / 4;

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: i64,
    cost: i64,
}

#[derive(Debug, Clone)]
pub struct MinCostFlow {
    adj: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    original_cap: Vec<i64>,
}

/// Edge handle returned by [`MinCostFlow::add_edge`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeId(usize);

impl MinCostFlow {
    pub fn new(nodes: usize) -> Self {
        MinCostFlow {
            adj: vec![Vec::new(); nodes],
            edges: Vec::new(),
            original_cap: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cap: i64, cost: i64) -> EdgeId {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, cost });
        self.edges.push(Edge {
            to: from,
            cap: 0,
            cost: -cost,
        });
        self.original_cap.push(cap);
        self.original_cap.push(0);
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        EdgeId(id)
    }

    /// Flow currently routed through a forward edge.
    pub fn flow(&self, e: EdgeId) -> i64 {
        self.original_cap[e.0] - self.edges[e.0].cap
    }

    pub fn head(&self, e: EdgeId) -> usize {
        self.edges[e.0].to
    }

    fn initial_potentials(&self, source: usize) -> Vec<i64> {
        if self.edges.iter().step_by(2).all(|e| e.cost >= 0) {
            return vec![0; self.adj.len()];
        }
        // Bellman-Ford over residual edges; assumes no negative cycles.
        let mut pot = vec![INF; self.adj.len()];
        pot[source] = 0;
        for _ in 0..self.adj.len() {
            let mut changed = false;
            for u in 0..self.adj.len() {
                if pot[u] == INF {
                    continue;
                }
                for &eid in &self.adj[u] {
                    let e = &self.edges[eid];
                    if e.cap > 0 && pot[u] + e.cost < pot[e.to] {
                        pot[e.to] = pot[u] + e.cost;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        pot.iter().map(|&p| if p == INF { 0 } else { p }).collect()
    }

    /// Sends up to `limit` units from `source` to `sink` at minimum cost.
    /// Returns `(flow, cost)`.
    pub fn run(&mut self, source: usize, sink: usize, limit: i64) -> (i64, i64) {
        assert_ne!(source, sink);
        let n = self.adj.len();
        let mut pot = self.initial_potentials(source);
        let mut dist = vec![INF; n];
        let mut parent: Vec<Option<usize>> = vec![None; n];
        let mut total_flow = 0;
        let mut total_cost = 0;

        while total_flow < limit {
            dist.fill(INF);
            parent.fill(None);
            dist[source] = 0;
            let mut heap = BinaryHeap::new();
            heap.push(Reverse((0i64, source)));
            while let Some(Reverse((d, u))) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                for &eid in &self.adj[u] {
                    let e = &self.edges[eid];
                    if e.cap <= 0 {
                        continue;
                    }
                    let nd = d + e.cost + pot[u] - pot[e.to];
                    if nd < dist[e.to] {
                        dist[e.to] = nd;
                        parent[e.to] = Some(eid);
                        heap.push(Reverse((nd, e.to)));
                    }
                }
            }
            if dist[sink] == INF {
                break;
            }
            for v in 0..n {
                if dist[v] < INF {
                    pot[v] += dist[v];
                }
            }
            let mut push = limit - total_flow;
            let mut v = sink;
            while let Some(eid) = parent[v] {
                push = push.min(self.edges[eid].cap);
                v = self.edges[eid ^ 1].to;
            }
            let mut v = sink;
            while let Some(eid) = parent[v] {
                self.edges[eid].cap -= push;
                self.edges[eid ^ 1].cap += push;
                total_cost += push * self.edges[eid].cost;
                v = self.edges[eid ^ 1].to;
            }
            total_flow += push;
        }
        (total_flow, total_cost)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_cheaper_parallel_route() {
        let mut g = MinCostFlow::new(4);
        let a = g.add_edge(0, 1, 1, 5);
        let b = g.add_edge(0, 2, 1, 1);
        g.add_edge(1, 3, 1, 0);
        g.add_edge(2, 3, 1, 0);
        assert_eq!(g.run(0, 3, 1), (1, 1));
        assert_eq!(g.flow(a), 0);
        assert_eq!(g.flow(b), 1);
    }

    #[test]
    fn reroutes_through_residual_edges() {
        // Classic case where the second augmentation cancels flow.
        let mut g = MinCostFlow::new(4);
        g.add_edge(0, 1, 1, 1);
        g.add_edge(0, 2, 1, 2);
        g.add_edge(1, 2, 1, 1);
        g.add_edge(1, 3, 1, 3);
        g.add_edge(2, 3, 1, 1);
        assert_eq!(g.run(0, 3, 2), (2, 7));
    }

    #[test]
    fn handles_negative_costs_without_cycles() {
        let mut g = MinCostFlow::new(3);
        g.add_edge(0, 1, 2, -4);
        g.add_edge(1, 2, 1, 1);
        g.add_edge(0, 2, 1, 0);
        assert_eq!(g.run(0, 2, 2), (2, -3));
    }

    #[test]
    fn stops_at_max_flow() {
        let mut g = MinCostFlow::new(2);
        g.add_edge(0, 1, 3, 2);
        assert_eq!(g.run(0, 1, 10), (3, 6));
    }
}
