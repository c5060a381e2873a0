//! Pairwise distances, exact k-nearest neighbors and the raw-signal baselines.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::signal::{DistanceMatrix, SignalSet};
use crate::{Error, Result};

/// L1 distance between two equal-length slices.
#[inline]
pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Exact L1 distance matrix between the rows of an `m x d` row-major matrix.
pub fn pairwise_l1(rows: &[f64], m: usize, d: usize) -> Result<DistanceMatrix> {
    if rows.len() != m * d {
        return Err(Error::DimensionMismatch { expected: m * d, found: rows.len() });
    }
    if rows.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue("pairwise_l1 input"));
    }
    pairwise_by(m, "l1", |i, j| l1(&rows[i * d..(i + 1) * d], &rows[j * d..(j + 1) * d]))
}

/// Fills a symmetric matrix from `dist(i, j)` evaluated once per pair `i < j`.
pub fn pairwise_by<F>(m: usize, name: &str, dist: F) -> Result<DistanceMatrix>
where
    F: Fn(usize, usize) -> f64 + Sync + Send,
{
    let upper = crate::par::map_range(m, |i| (i + 1..m).map(|j| dist(i, j)).collect::<Vec<_>>());
    let mut values = vec![0.0; m * m];
    for (i, row) in upper.into_iter().enumerate() {
        for (k, v) in row.into_iter().enumerate() {
            let j = i + 1 + k;
            values[i * m + j] = v;
            values[j * m + i] = v;
        }
    }
    DistanceMatrix::new(m, values, name)
}

/// Total variation `1/2 ||mu_i - mu_j||_1` between two raw signal columns.
pub fn tv_distance(s: &SignalSet, i: usize, j: usize) -> Result<f64> {
    check_index(s, i)?;
    check_index(s, j)?;
    Ok(0.5 * l1(s.column(i), s.column(j)))
}

/// Euclidean distance between two raw signal columns.
pub fn euclidean_distance(s: &SignalSet, i: usize, j: usize) -> Result<f64> {
    check_index(s, i)?;
    check_index(s, j)?;
    Ok(euclid(s.column(i), s.column(j)))
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    math::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

fn check_index(s: &SignalSet, i: usize) -> Result<()> {
    if i >= s.signals() {
        return Err(Error::IndexOutOfRange { index: i, len: s.signals() });
    }
    Ok(())
}

pub fn tv_matrix(s: &SignalSet) -> Result<DistanceMatrix> {
    pairwise_by(s.signals(), "tv", |i, j| 0.5 * l1(s.column(i), s.column(j)))
}

pub fn euclidean_matrix(s: &SignalSet) -> Result<DistanceMatrix> {
    pairwise_by(s.signals(), "euclidean", |i, j| euclid(s.column(i), s.column(j)))
}

/// Per-query neighbor lists, each sorted by distance then index.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborList {
    lists: Vec<Vec<(usize, f64)>>,
}

impl NeighborList {
    pub fn from_rankings(lists: Vec<Vec<(usize, f64)>>) -> Self {
        Self { lists }
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    pub fn neighbors(&self, query: usize) -> &[(usize, f64)] {
        &self.lists[query]
    }

    /// Keeps the first `k` neighbors of every query.
    pub fn truncated(&self, k: usize) -> Self {
        Self { lists: self.lists.iter().map(|l| l[..k.min(l.len())].to_vec()).collect() }
    }
}

fn top_k(mut cand: Vec<(usize, f64)>, k: usize) -> Vec<(usize, f64)> {
    let cmp = |a: &(usize, f64), b: &(usize, f64)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
    if k < cand.len() {
        cand.select_nth_unstable_by(k, cmp);
        cand.truncate(k);
    }
    cand.sort_by(cmp);
    cand
}

/// Exact `k` nearest neighbors from a distance matrix. Self-matches are
/// excluded and ties go to the smaller index.
pub fn knn(dm: &DistanceMatrix, k: usize) -> Result<NeighborList> {
    let m = dm.len();
    if k >= m {
        return Err(Error::KTooLarge { k, m });
    }
    let lists = crate::par::map_range(m, |i| {
        top_k((0..m).filter(|&j| j != i).map(|j| (j, dm.get(i, j))).collect(), k)
    });
    Ok(NeighborList { lists })
}

/// Exact `k` nearest neighbors under L1 directly from `m x d` rows.
pub fn knn_rows(rows: &[f64], m: usize, d: usize, k: usize) -> Result<NeighborList> {
    if rows.len() != m * d {
        return Err(Error::DimensionMismatch { expected: m * d, found: rows.len() });
    }
    if k >= m {
        return Err(Error::KTooLarge { k, m });
    }
    let row = |i: usize| &rows[i * d..(i + 1) * d];
    let lists = crate::par::map_range(m, |i| {
        top_k((0..m).filter(|&j| j != i).map(|j| (j, l1(row(i), row(j)))).collect(), k)
    });
    Ok(NeighborList { lists })
}
