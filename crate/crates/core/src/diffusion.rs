//! Random-walk diffusion operator `P = D^-1 A` on a graph.
//!
//! Signals are distributions over nodes, so they are pushed forward with the
//! transpose: `mu' = P^T mu`, i.e. `mu'[j] = sum_i mu[i] P[i, j]`. This keeps
//! the total mass of every column fixed. Powers of `P` are never formed; each
//! step is one sparse matrix-vector product.

use alloc::vec;
use alloc::vec::Vec;

use crate::graph::Graph;
use crate::signal::SignalSet;
use crate::{Error, Result};

/// Options applied when turning adjacency into a walk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkOptions {
    /// Holding probability `beta` of a lazy walk `beta I + (1 - beta) D^-1 A`.
    /// Zero gives the plain walk. Bipartite graphs (even rings, grids) need a
    /// positive value, otherwise the walk is periodic.
    pub laziness: f64,
    /// Density normalization `A <- Q^-1 A Q^-1`, `Q = diag(row sums of A)`,
    /// applied before the degree normalization.
    pub anisotropic: bool,
}

impl Default for WalkOptions {
    fn default() -> Self {
        Self { laziness: 0.0, anisotropic: false }
    }
}

impl WalkOptions {
    pub fn lazy(laziness: f64) -> Self {
        Self { laziness, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Csr {
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl Csr {
    fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[i]..self.offsets[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    fn transpose(&self, n: usize) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &j in &self.indices {
            counts[j + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut indices = vec![0usize; self.indices.len()];
        let mut values = vec![0.0; self.values.len()];
        for i in 0..n {
            for (j, v) in self.row(i) {
                let slot = next[j];
                indices[slot] = i;
                values[slot] = v;
                next[j] += 1;
            }
        }
        Self { offsets: counts, indices, values }
    }
}

/// Row-stochastic transition matrix with its transpose kept for push-forward.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionOperator {
    n: usize,
    degree: Vec<f64>,
    forward: Csr,
    pushforward: Csr,
    options: WalkOptions,
    graph_fingerprint: u64,
}

impl DiffusionOperator {
    /// Builds `P` from a connected graph.
    pub fn build(g: &Graph, options: WalkOptions) -> Result<Self> {
        if !(0.0..1.0).contains(&options.laziness) {
            return Err(Error::InvalidParameter(alloc::format!(
                "laziness must lie in [0, 1), got {}",
                options.laziness
            )));
        }
        let n = g.node_count();
        let (offsets, neighbors, weights) = g.csr();
        let mut values = weights.to_vec();
        if options.anisotropic {
            let q = g.degrees();
            for i in 0..n {
                for k in offsets[i]..offsets[i + 1] {
                    values[k] /= q[i] * q[neighbors[k]];
                }
            }
        }
        let mut degree = vec![0.0; n];
        for i in 0..n {
            degree[i] = values[offsets[i]..offsets[i + 1]].iter().sum();
            if degree[i] <= 0.0 {
                return Err(Error::ZeroDegreeNode(i));
            }
        }

        let beta = options.laziness;
        let mut p_offsets = Vec::with_capacity(n + 1);
        let mut p_indices = Vec::with_capacity(neighbors.len() + n);
        let mut p_values = Vec::with_capacity(neighbors.len() + n);
        p_offsets.push(0);
        for i in 0..n {
            let mut diag_done = beta == 0.0;
            for k in offsets[i]..offsets[i + 1] {
                let j = neighbors[k];
                let mut v = (1.0 - beta) * values[k] / degree[i];
                if j == i {
                    v += beta;
                    diag_done = true;
                } else if j > i && !diag_done {
                    p_indices.push(i);
                    p_values.push(beta);
                    diag_done = true;
                }
                p_indices.push(j);
                p_values.push(v);
            }
            if !diag_done {
                p_indices.push(i);
                p_values.push(beta);
            }
            p_offsets.push(p_indices.len());
        }
        let forward = Csr { offsets: p_offsets, indices: p_indices, values: p_values };
        let pushforward = forward.transpose(n);
        Ok(Self { n, degree, forward, pushforward, options, graph_fingerprint: g.fingerprint() })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Row sums of the (possibly density-normalized) adjacency.
    pub fn degree(&self) -> &[f64] {
        &self.degree
    }

    pub fn options(&self) -> WalkOptions {
        self.options
    }

    pub fn graph_fingerprint(&self) -> u64 {
        self.graph_fingerprint
    }

    /// Stored entries of row `i` of `P`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.forward.row(i)
    }

    /// Entry `P[i, j]`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    /// `P` as a dense row-major matrix. For tests and small instances only.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[i * self.n + j] += v;
            }
        }
        d
    }

    /// Largest `|row sum - 1|` over all rows.
    pub fn max_row_sum_error(&self) -> f64 {
        (0..self.n)
            .map(|i| (self.row(i).map(|(_, v)| v).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// The stationary distribution of the walk, `degree / sum(degree)`.
    pub fn stationary(&self) -> Vec<f64> {
        let total: f64 = self.degree.iter().sum();
        self.degree.iter().map(|d| d / total).collect()
    }

    /// One push-forward step: `out = P^T x`.
    pub fn step_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.pushforward.row(j).map(|(i, p)| p * x[i]).sum();
        }
    }

    /// Applies `steps` push-forward steps to `x` in place, using `scratch` as
    /// the second buffer.
    pub fn advance(&self, x: &mut Vec<f64>, scratch: &mut Vec<f64>, steps: usize) {
        for _ in 0..steps {
            self.step_into(x, scratch);
            core::mem::swap(x, scratch);
        }
    }

    /// Pushes every signal forward `steps` times.
    pub fn apply_diffusion(&self, signals: &SignalSet, steps: usize) -> Result<SignalSet> {
        signals.check_nodes(self.n)?;
        let n = self.n;
        let mut out = signals.column_major().to_vec();
        crate::par::for_each_chunk(&mut out, n, |_, col| {
            let mut x = col.to_vec();
            let mut scratch = vec![0.0; n];
            self.advance(&mut x, &mut scratch, steps);
            col.copy_from_slice(&x);
        });
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue("diffusion"));
        }
        let s = SignalSet::from_column_major(n, signals.signals(), out)?
            .with_normalized_flag(signals.is_normalized());
        Ok(match signals.labels() {
            Some(l) => s.with_labels(l.to_vec())?,
            None => s,
        })
    }
}
