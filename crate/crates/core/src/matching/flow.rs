use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: u32,
    cost: f64,
}

/// Successive-shortest-path min-cost flow on real costs.
///
/// Shortest paths are found with a queue-based Bellman-Ford, so negative
/// edge costs are fine as long as the graph has no negative cycle in its
/// initial state (true for the layered matching graphs built here).
#[derive(Debug, Clone)]
pub struct MinCostFlow {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl MinCostFlow {
    pub fn new(nodes: usize) -> Self {
        MinCostFlow {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    /// Adds `from → to` and returns the edge index.
    pub fn add_edge(&mut self, from: usize, to: usize, cap: u32, cost: f64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, cost });
        self.edges.push(Edge {
            to: from,
            cap: 0,
            cost: -cost,
        });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    /// Flow currently on edge `id`.
    pub fn flow(&self, id: usize) -> u32 {
        self.edges[id ^ 1].cap
    }

    /// Pushes flow one unit at a time along cheapest paths until no path has
    /// cost below `-tolerance`. Returns `(flow, cost)`.
    ///
    /// Stopping at the first non-negative path yields the minimum cost over
    /// all flow values, i.e. a maximum-weight matching when costs are negated
    /// weights.
    pub fn min_cost_any_flow(&mut self, source: usize, sink: usize, tolerance: f64) -> (u32, f64) {
        let n = self.adj.len();
        let mut total_flow = 0;
        let mut total_cost = 0.0;
        loop {
            let mut dist = vec![f64::INFINITY; n];
            let mut parent = vec![usize::MAX; n];
            let mut queued = vec![false; n];
            let mut queue = VecDeque::new();
            dist[source] = 0.0;
            queue.push_back(source);
            queued[source] = true;
            while let Some(u) = queue.pop_front() {
                queued[u] = false;
                for &e in &self.adj[u] {
                    let edge = &self.edges[e];
                    if edge.cap == 0 {
                        continue;
                    }
                    let nd = dist[u] + edge.cost;
                    // strict improvement beyond rounding noise
                    if nd < dist[edge.to] - 1e-12 * (1.0 + nd.abs()) {
                        dist[edge.to] = nd;
                        parent[edge.to] = e;
                        if !queued[edge.to] {
                            queued[edge.to] = true;
                            queue.push_back(edge.to);
                        }
                    }
                }
            }
            if !(dist[sink] < -tolerance) {
                break;
            }
            let mut push = u32::MAX;
            let mut v = sink;
            while v != source {
                let e = parent[v];
                push = push.min(self.edges[e].cap);
                v = self.edges[e ^ 1].to;
            }
            let mut v = sink;
            while v != source {
                let e = parent[v];
                self.edges[e].cap -= push;
                self.edges[e ^ 1].cap += push;
                v = self.edges[e ^ 1].to;
            }
            total_flow += push;
            total_cost += f64::from(push) * dist[sink];
        }
        (total_flow, total_cost)
    }
}
