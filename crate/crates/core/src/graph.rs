//! Immutable weighted undirected graphs in compressed sparse row form.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// One edge record as read from an edge list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(src: usize, dst: usize, weight: f64) -> Self {
        Self { src, dst, weight }
    }

    pub fn unit(src: usize, dst: usize) -> Self {
        Self::new(src, dst, 1.0)
    }
}

/// Things worth knowing about a load that are not errors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadReport {
    /// Nodes carrying a self-loop; the loop weight is folded into the degree.
    pub self_loops: Vec<usize>,
    /// Records with weight exactly zero; they do not create adjacency.
    pub zero_weight_edges: usize,
    /// Records that repeated an existing edge with the same weight.
    pub duplicate_records: usize,
    /// Undirected edges that were given in one direction only and mirrored.
    pub mirrored: usize,
}

/// Symmetric sparse adjacency over dense node indices `0..n`.
///
/// Every stored edge has a strictly positive weight. Both directions of an
/// undirected edge are stored; a self-loop is stored once on its row.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    weights: Vec<f64>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph from edge records, mirroring one-directional edges.
    ///
    /// `n` is the declared node count; `None` infers `max index + 1`.
    /// The graph must be connected.
    pub fn from_edges<I>(n: Option<usize>, edges: I) -> Result<(Self, LoadReport)>
    where
        I: IntoIterator<Item = Edge>,
    {
        let mut report = LoadReport::default();
        let mut directed: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut max_index = None::<usize>;
        for e in edges {
            if !e.weight.is_finite() {
                return Err(Error::NonFiniteValue("edge weight"));
            }
            if e.weight < 0.0 {
                return Err(Error::NegativeWeight { src: e.src, dst: e.dst, weight: e.weight });
            }
            if let Some(n) = n {
                for index in [e.src, e.dst] {
                    if index >= n {
                        return Err(Error::NodeOutOfRange { index, n });
                    }
                }
            }
            max_index = Some(max_index.map_or(e.src.max(e.dst), |m| m.max(e.src).max(e.dst)));
            match directed.get(&(e.src, e.dst)) {
                Some(&w) if w == e.weight => report.duplicate_records += 1,
                Some(&w) => {
                    return Err(Error::AsymmetricWeights { src: e.src, dst: e.dst, first: w, second: e.weight })
                }
                None => {
                    directed.insert((e.src, e.dst), e.weight);
                }
            }
        }
        let n = match n {
            Some(n) => n,
            None => max_index.map_or(0, |m| m + 1),
        };
        if n == 0 {
            return Err(Error::EmptyGraph);
        }

        // Collapse to undirected pairs (u <= v).
        let mut undirected: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (&(u, v), &w) in &directed {
            let key = (u.min(v), u.max(v));
            if u == v {
                undirected.insert(key, w);
                continue;
            }
            match directed.get(&(v, u)) {
                Some(&back) if back != w => {
                    return Err(Error::AsymmetricWeights { src: u, dst: v, first: w, second: back })
                }
                Some(_) => {
                    undirected.insert(key, w);
                }
                None => {
                    report.mirrored += 1;
                    undirected.insert(key, w);
                }
            }
        }

        let mut triples = Vec::with_capacity(undirected.len() * 2);
        for (&(u, v), &w) in &undirected {
            if w == 0.0 {
                report.zero_weight_edges += 1;
                continue;
            }
            if u == v {
                report.self_loops.push(u);
                triples.push((u, v, w));
            } else {
                triples.push((u, v, w));
                triples.push((v, u, w));
            }
        }
        let edge_count = undirected.values().filter(|&&w| w > 0.0).count();
        let graph = Self::from_triples(n, triples, edge_count);
        let components = graph.component_count();
        if components != 1 {
            return Err(Error::DisconnectedGraph { components });
        }
        Ok((graph, report))
    }

    fn from_triples(n: usize, mut triples: Vec<(usize, usize, f64)>, edge_count: usize) -> Self {
        triples.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut offsets = vec![0usize; n + 1];
        for &(u, _, _) in &triples {
            offsets[u + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let neighbors = triples.iter().map(|t| t.1).collect();
        let weights = triples.iter().map(|t| t.2).collect();
        Self { n, offsets, neighbors, weights, edge_count }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Number of undirected edges, self-loops included.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Number of stored adjacency entries (both directions).
    pub fn nnz(&self) -> usize {
        self.neighbors.len()
    }

    /// Neighbors of `u` with their weights, in ascending index order.
    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[u]..self.offsets[u + 1];
        self.neighbors[r.clone()].iter().copied().zip(self.weights[r].iter().copied())
    }

    pub fn degree(&self, u: usize) -> f64 {
        self.weights[self.offsets[u]..self.offsets[u + 1]].iter().sum()
    }

    pub fn degrees(&self) -> Vec<f64> {
        (0..self.n).map(|u| self.degree(u)).collect()
    }

    /// Undirected edges with `src <= dst`.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u).filter(move |&(v, _)| u <= v).map(move |(v, w)| Edge::new(u, v, w))
        })
    }

    /// Weight of edge `(u, v)`, zero when absent.
    pub fn weight(&self, u: usize, v: usize) -> f64 {
        let r = self.offsets[u]..self.offsets[u + 1];
        match self.neighbors[r.clone()].binary_search(&v) {
            Ok(k) => self.weights[r.start + k],
            Err(_) => 0.0,
        }
    }

    /// True when every edge weight equals one.
    pub fn is_unit_weight(&self) -> bool {
        self.weights.iter().all(|&w| w == 1.0)
    }

    pub(crate) fn csr(&self) -> (&[usize], &[usize], &[f64]) {
        (&self.offsets, &self.neighbors, &self.weights)
    }

    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::new();
        let mut components = 0;
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for (v, _) in self.neighbors(u) {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        components
    }

    /// FNV-1a hash of the adjacency structure and weights.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv::new();
        h.write_u64(self.n as u64);
        for &o in &self.offsets {
            h.write_u64(o as u64);
        }
        for &v in &self.neighbors {
            h.write_u64(v as u64);
        }
        for &w in &self.weights {
            h.write_u64(w.to_bits());
        }
        h.finish()
    }
}

pub(crate) struct Fnv(u64);

impl Fnv {
    pub fn new() -> Self {
        Self(0xcbf2_9ce4_8422_2325)
    }

    pub fn write_u64(&mut self, x: u64) {
        for b in x.to_le_bytes() {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::from_edges(None, [Edge::unit(0, 1), Edge::unit(1, 2), Edge::unit(0, 2)]).unwrap().0
    }

    #[test]
    fn triangle_has_three_edges() {
        let g = triangle();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.nnz(), 6);
    }

    #[test]
    fn path_degrees() {
        let (g, report) = Graph::from_edges(None, [Edge::unit(0, 1), Edge::unit(1, 2)]).unwrap();
        assert_eq!(g.degrees(), vec![1.0, 2.0, 1.0]);
        assert_eq!(report.mirrored, 2);
    }

    #[test]
    fn isolated_node_is_disconnected() {
        let err = Graph::from_edges(Some(3), [Edge::unit(0, 1)]).unwrap_err();
        assert_eq!(err, Error::DisconnectedGraph { components: 2 });
    }

    #[test]
    fn conflicting_directions_rejected() {
        let err = Graph::from_edges(None, [Edge::new(0, 1, 1.0), Edge::new(1, 0, 2.0)]).unwrap_err();
        assert!(matches!(err, Error::AsymmetricWeights { .. }));
    }

    #[test]
    fn both_directions_with_same_weight_accepted() {
        let (g, report) = Graph::from_edges(None, [Edge::new(0, 1, 2.0), Edge::new(1, 0, 2.0)]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(report.mirrored, 0);
        assert_eq!(g.weight(1, 0), 2.0);
    }

    #[test]
    fn negative_weight_rejected() {
        let err = Graph::from_edges(None, [Edge::new(0, 1, -1.0)]).unwrap_err();
        assert!(matches!(err, Error::NegativeWeight { .. }));
    }

    #[test]
    fn out_of_range_index_rejected() {
        let err = Graph::from_edges(Some(2), [Edge::unit(0, 2)]).unwrap_err();
        assert_eq!(err, Error::NodeOutOfRange { index: 2, n: 2 });
    }

    #[test]
    fn self_loops_flagged_and_counted_in_degree() {
        let (g, report) =
            Graph::from_edges(None, [Edge::unit(0, 1), Edge::new(1, 1, 3.0)]).unwrap();
        assert_eq!(report.self_loops, vec![1]);
        assert_eq!(g.degree(1), 4.0);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn zero_weight_edges_do_not_connect() {
        let err = Graph::from_edges(None, [Edge::unit(0, 1), Edge::new(1, 2, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::DisconnectedGraph { .. }));
    }

    #[test]
    fn adjacency_is_symmetric() {
        let (g, _) = Graph::from_edges(
            None,
            [Edge::new(0, 1, 0.5), Edge::new(2, 1, 2.0), Edge::new(3, 0, 1.5), Edge::new(2, 3, 1.0)],
        )
        .unwrap();
        for u in 0..4 {
            for (v, w) in g.neighbors(u) {
                assert_eq!(g.weight(v, u), w);
            }
        }
    }

    #[test]
    fn fingerprint_sees_weights() {
        let a = Graph::from_edges(None, [Edge::new(0, 1, 1.0)]).unwrap().0;
        let b = Graph::from_edges(None, [Edge::new(0, 1, 2.0)]).unwrap().0;
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint(), a.clone().fingerprint());
    }
}
