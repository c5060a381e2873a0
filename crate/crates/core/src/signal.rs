//! Signal matrices (nodes x signals) and pairwise distance matrices.

use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Result};

/// `n x m` nonnegative matrix whose columns are signals on the graph nodes.
///
/// Storage is column-major so each signal is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSet {
    n: usize,
    m: usize,
    values: Vec<f64>,
    labels: Option<Vec<String>>,
    normalized: bool,
}

impl SignalSet {
    /// Builds a set from column-major values, rejecting negative or non-finite entries.
    pub fn from_column_major(n: usize, m: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * m {
            return Err(Error::DimensionMismatch { expected: n * m, found: values.len() });
        }
        for (idx, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteValue("signal entry"));
            }
            if v < 0.0 {
                return Err(Error::NegativeEntry { row: idx % n.max(1), col: idx / n.max(1), value: v });
            }
        }
        Ok(Self { n, m, values, labels: None, normalized: false })
    }

    /// Builds a set from a row-major `n x m` matrix.
    pub fn from_row_major(n: usize, m: usize, values: &[f64]) -> Result<Self> {
        if values.len() != n * m {
            return Err(Error::DimensionMismatch { expected: n * m, found: values.len() });
        }
        let mut cm = Vec::with_capacity(n * m);
        for j in 0..m {
            for i in 0..n {
                cm.push(values[i * m + j]);
            }
        }
        Self::from_column_major(n, m, cm)
    }

    pub fn from_columns(n: usize, columns: &[Vec<f64>]) -> Result<Self> {
        let mut values = Vec::with_capacity(n * columns.len());
        for c in columns {
            if c.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: c.len() });
            }
            values.extend_from_slice(c);
        }
        Self::from_column_major(n, columns.len(), values)
    }

    /// Unit point masses at the given nodes.
    pub fn diracs(n: usize, nodes: &[usize]) -> Result<Self> {
        let mut values = alloc::vec![0.0; n * nodes.len()];
        for (j, &node) in nodes.iter().enumerate() {
            if node >= n {
                return Err(Error::IndexOutOfRange { index: node, len: n });
            }
            values[j * n + node] = 1.0;
        }
        let mut s = Self::from_column_major(n, nodes.len(), values)?;
        s.normalized = true;
        Ok(s)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, found: labels.len() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub(crate) fn with_normalized_flag(mut self, normalized: bool) -> Self {
        self.normalized = normalized;
        self
    }

    /// Number of graph nodes (rows).
    pub fn nodes(&self) -> usize {
        self.n
    }

    /// Number of signals (columns).
    pub fn signals(&self) -> usize {
        self.m
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.values[j * self.n..(j + 1) * self.n]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n.max(1)).take(self.m)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[col * self.n + row]
    }

    pub fn column_major(&self) -> &[f64] {
        &self.values
    }

    pub fn column_sums(&self) -> Vec<f64> {
        self.columns().map(|c| c.iter().sum()).collect()
    }

    /// Checks the row count against the graph the signals will be used with.
    pub fn check_nodes(&self, n: usize) -> Result<()> {
        if self.n != n {
            return Err(Error::DimensionMismatch { expected: n, found: self.n });
        }
        Ok(())
    }

    /// Scales every column onto the probability simplex.
    ///
    /// Zero entries stay zero. Already-normalized columns are left bitwise
    /// unchanged when their sum is exactly one.
    pub fn normalize_columns(&self) -> Result<Self> {
        let mut values = self.values.clone();
        for (j, col) in values.chunks_exact_mut(self.n.max(1)).take(self.m).enumerate() {
            let s: f64 = col.iter().sum();
            if s <= 0.0 {
                return Err(Error::ZeroColumn(j));
            }
            if s != 1.0 {
                col.iter_mut().for_each(|v| *v /= s);
            }
        }
        Ok(Self { n: self.n, m: self.m, values, labels: self.labels.clone(), normalized: true })
    }
}

/// Symmetric `m x m` matrix of pairwise distances, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    m: usize,
    values: Vec<f64>,
    metric_name: String,
    labels: Option<Vec<String>>,
}

impl DistanceMatrix {
    pub fn new(m: usize, values: Vec<f64>, metric_name: impl Into<String>) -> Result<Self> {
        if values.len() != m * m {
            return Err(Error::DimensionMismatch { expected: m * m, found: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue("distance matrix"));
        }
        Ok(Self { m, values, metric_name: metric_name.into(), labels: None })
    }

    pub fn with_labels(mut self, labels: Option<Vec<String>>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != self.m {
                return Err(Error::DimensionMismatch { expected: self.m, found: l.len() });
            }
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.m + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.m..(i + 1) * self.m]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn metric_name(&self) -> &str {
        &self.metric_name
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Largest violation of symmetry, zero diagonal and nonnegativity.
    pub fn max_violation(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.m {
            worst = worst.max(self.get(i, i).abs());
            for j in 0..self.m {
                let d = self.get(i, j);
                worst = worst.max((d - self.get(j, i)).abs()).max(-d);
            }
        }
        worst
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let v = self.max_violation();
        if v > tol {
            return Err(Error::InvalidCost(alloc::format!(
                "distance matrix violates symmetry/zero-diagonal/nonnegativity by {v}"
            )));
        }
        Ok(())
    }
}
