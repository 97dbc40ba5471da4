//! Undirected weighted graphs and exact all-pairs shortest paths.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{CrowdError, Result};

/// Undirected graph with nonnegative edge weights, stored as adjacency lists.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adj: Vec<Vec<(usize, f64)>>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    /// Adds (or shortens) the undirected edge `u`-`v`.
    pub fn add_edge(&mut self, u: usize, v: usize, w: f64) -> Result<()> {
        if !(w >= 0.0) || !w.is_finite() {
            return Err(CrowdError::Contract(format!(
                "edge {u}-{v} has invalid weight {w}"
            )));
        }
        if u == v {
            return Ok(());
        }
        for (a, b) in [(u, v), (v, u)] {
            match self.adj[a].iter_mut().find(|(t, _)| *t == b) {
                Some(e) => e.1 = e.1.min(w),
                None => self.adj[a].push((b, w)),
            }
        }
        Ok(())
    }

    pub fn neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.adj[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].iter().any(|(t, _)| *t == v)
    }

    /// Component sizes, largest first.
    pub fn component_sizes(&self) -> Vec<usize> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut sizes = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut size = 0;
            while let Some(u) = stack.pop() {
                size += 1;
                for &(v, _) in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            sizes.push(size);
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }

    pub fn require_connected(&self) -> Result<()> {
        let sizes = self.component_sizes();
        if sizes.len() > 1 {
            Err(CrowdError::Disconnected {
                component_sizes: sizes,
            })
        } else {
            Ok(())
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then node index
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest path lengths; unreachable nodes are `+inf`.
pub fn dijkstra(graph: &Graph, source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; graph.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry {
        dist: 0.0,
        node: source,
    });
    while let Some(Entry { dist: d, node }) = heap.pop() {
        if d > dist[node] {
            continue;
        }
        for &(next, w) in graph.neighbors(node) {
            let nd = d + w;
            if nd < dist[next] {
                dist[next] = nd;
                heap.push(Entry {
                    dist: nd,
                    node: next,
                });
            }
        }
    }
    dist
}

/// Geodesic distance matrix from Dijkstra at every source. The graph must be
/// connected.
pub fn all_pairs_shortest_paths(graph: &Graph) -> Result<Array2<f64>> {
    graph.require_connected()?;
    let n = graph.len();
    let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|s| dijkstra(graph, s)).collect();
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            // both directions are valid path lengths; keep the shorter so the
            // result is exactly symmetric
            out[[i, j]] = rows[i][j].min(rows[j][i]);
        }
    }
    Ok(out)
}
