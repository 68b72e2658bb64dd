//! Integral minimum-cost flow by successive shortest paths with potentials.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

pub type ArcId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub capacity: i64,
    pub cost: i64,
}

#[derive(Clone, Debug, Default)]
pub struct FlowNetwork {
    num_nodes: usize,
    arcs: Vec<Arc>,
    pub source: usize,
    pub sink: usize,
}

impl FlowNetwork {
    pub fn new(num_nodes: usize, source: usize, sink: usize) -> Self {
        Self {
            num_nodes,
            arcs: Vec::new(),
            source,
            sink,
        }
    }

    pub fn add_node(&mut self) -> usize {
        self.num_nodes += 1;
        self.num_nodes - 1
    }

    pub fn add_arc(&mut self, from: usize, to: usize, capacity: i64, cost: i64) -> ArcId {
        assert!(
            from < self.num_nodes && to < self.num_nodes,
            "arc endpoint out of range"
        );
        assert!(capacity >= 0, "negative capacity");
        self.arcs.push(Arc {
            from,
            to,
            capacity,
            cost,
        });
        self.arcs.len() - 1
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowSolution {
    /// Flow per arc, indexed by [`ArcId`].
    pub flows: Vec<i64>,
    pub cost: i64,
}

/// Residual edge; edges `2a` and `2a + 1` are arc `a` and its reverse.
#[derive(Clone, Debug)]
struct Edge {
    to: usize,
    residual: i64,
    cost: i64,
}

/// Sends exactly `required_flow` units from source to sink at minimum cost.
pub fn min_cost_flow(net: &FlowNetwork, required_flow: i64) -> Result<FlowSolution> {
    let n = net.num_nodes;
    let mut edges = Vec::with_capacity(net.arcs.len() * 2);
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for arc in &net.arcs {
        adjacency[arc.from].push(edges.len());
        edges.push(Edge {
            to: arc.to,
            residual: arc.capacity,
            cost: arc.cost,
        });
        adjacency[arc.to].push(edges.len());
        edges.push(Edge {
            to: arc.from,
            residual: 0,
            cost: -arc.cost,
        });
    }

    let mut potential = initial_potentials(n, net.source, &edges, &adjacency);
    let mut sent = 0i64;
    let mut total = 0i64;
    let mut dist = vec![i64::MAX; n];
    let mut via = vec![usize::MAX; n];

    while sent < required_flow {
        dist.iter_mut().for_each(|d| *d = i64::MAX);
        via.iter_mut().for_each(|v| *v = usize::MAX);
        dist[net.source] = 0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0i64, net.source)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &e in &adjacency[u] {
                let edge = &edges[e];
                if edge.residual == 0 || potential[edge.to] == i64::MAX {
                    continue;
                }
                let reduced = edge.cost + potential[u] - potential[edge.to];
                let nd = d + reduced;
                if nd < dist[edge.to] {
                    dist[edge.to] = nd;
                    via[edge.to] = e;
                    heap.push(Reverse((nd, edge.to)));
                }
            }
        }
        if dist[net.sink] == i64::MAX {
            return Err(Error::InfeasibleFlow {
                required: required_flow,
                achieved: sent,
            });
        }
        for v in 0..n {
            if dist[v] != i64::MAX && potential[v] != i64::MAX {
                potential[v] += dist[v];
            }
        }

        let mut push = required_flow - sent;
        let mut v = net.sink;
        while v != net.source {
            let e = via[v];
            push = push.min(edges[e].residual);
            v = edges[e ^ 1].to;
        }
        let mut v = net.sink;
        while v != net.source {
            let e = via[v];
            edges[e].residual -= push;
            edges[e ^ 1].residual += push;
            total += push * edges[e].cost;
            v = edges[e ^ 1].to;
        }
        sent += push;
    }

    let flows = net
        .arcs
        .iter()
        .enumerate()
        .map(|(a, arc)| arc.capacity - edges[2 * a].residual)
        .collect();
    Ok(FlowSolution { flows, cost: total })
}

/// Bellman-Ford distances from the source so that reduced costs start
/// non-negative even with negative arc costs. Unreachable nodes stay at `MAX`.
fn initial_potentials(
    n: usize,
    source: usize,
    edges: &[Edge],
    adjacency: &[Vec<usize>],
) -> Vec<i64> {
    let mut dist = vec![i64::MAX; n];
    dist[source] = 0;
    for _ in 0..n {
        let mut changed = false;
        for u in 0..n {
            if dist[u] == i64::MAX {
                continue;
            }
            for &e in &adjacency[u] {
                let edge = &edges[e];
                if edge.residual > 0 && dist[u] + edge.cost < dist[edge.to] {
                    dist[edge.to] = dist[u] + edge.cost;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist
}
