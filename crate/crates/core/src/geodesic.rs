//! Exact shortest-path distances.

use alloc::collections::{BinaryHeap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::graph::Graph;
use crate::{Error, Result};

/// Distances from a set of source nodes to every node.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicTable {
    n: usize,
    sources: Vec<usize>,
    distances: Vec<f64>,
}

impl GeodesicTable {
    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Distances from the `k`-th source.
    pub fn from_source(&self, k: usize) -> &[f64] {
        &self.distances[k * self.n..(k + 1) * self.n]
    }

    /// Distance between source `sources()[k]` and node `v`.
    pub fn get(&self, k: usize, v: usize) -> f64 {
        self.distances[k * self.n + v]
    }

    /// True when the sources are exactly `0..n`, i.e. a full square table.
    pub fn is_all_pairs(&self) -> bool {
        self.sources.len() == self.n && self.sources.iter().enumerate().all(|(k, &s)| k == s)
    }

    /// Row-major `n x n` matrix for all-pairs tables.
    pub fn into_matrix(self) -> Option<Vec<f64>> {
        self.is_all_pairs().then_some(self.distances)
    }

    pub fn diameter(&self) -> f64 {
        self.distances.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, PartialEq)]
struct State {
    dist: f64,
    node: usize,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(g: &Graph, source: usize, out: &mut [f64]) {
    out.iter_mut().for_each(|d| *d = f64::INFINITY);
    out[source] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(State { dist: 0.0, node: source });
    while let Some(State { dist, node }) = heap.pop() {
        if dist > out[node] {
            continue;
        }
        for (v, w) in g.neighbors(node) {
            let nd = dist + w;
            if nd < out[v] {
                out[v] = nd;
                heap.push(State { dist: nd, node: v });
            }
        }
    }
}

fn bfs(g: &Graph, source: usize, out: &mut [f64]) {
    out.iter_mut().for_each(|d| *d = f64::INFINITY);
    out[source] = 0.0;
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for (v, _) in g.neighbors(u) {
            if out[v] == f64::INFINITY {
                out[v] = out[u] + 1.0;
                queue.push_back(v);
            }
        }
    }
}

/// Shortest-path distances from each source; breadth-first search on
/// unit-weight graphs, Dijkstra otherwise.
pub fn geodesic_distances(g: &Graph, sources: &[usize]) -> Result<GeodesicTable> {
    let n = g.node_count();
    if let Some(&bad) = sources.iter().find(|&&s| s >= n) {
        return Err(Error::NodeOutOfRange { index: bad, n });
    }
    let unit = g.is_unit_weight();
    let mut distances = vec![0.0; n * sources.len()];
    crate::par::for_each_chunk(&mut distances, n, |k, out| {
        if unit {
            bfs(g, sources[k], out)
        } else {
            dijkstra(g, sources[k], out)
        }
    });
    Ok(GeodesicTable { n, sources: sources.to_vec(), distances })
}

/// All-pairs table.
pub fn all_pairs(g: &Graph) -> GeodesicTable {
    let sources: Vec<usize> = (0..g.node_count()).collect();
    geodesic_distances(g, &sources).expect("sources are in range")
}
