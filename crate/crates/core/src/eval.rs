//! Retrieval precision, clustering agreement scores and k-medoids.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::metric::NeighborList;
use crate::signal::DistanceMatrix;
use crate::{Error, Result};

/// Cluster assignments relabelled to `0..classes` in order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LabelVector {
    labels: Vec<usize>,
    classes: usize,
}

impl LabelVector {
    pub fn new(raw: &[usize]) -> Self {
        let mut map: Vec<(usize, usize)> = Vec::new();
        let labels = raw
            .iter()
            .map(|&l| match map.iter().find(|(k, _)| *k == l) {
                Some(&(_, v)) => v,
                None => {
                    map.push((l, map.len()));
                    map.len() - 1
                }
            })
            .collect();
        Self { labels, classes: map.len() }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.labels
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.classes];
        self.labels.iter().for_each(|&l| s[l] += 1);
        s
    }
}

/// Mean over queries of `|predicted top-k ∩ true top-k| / k`.
pub fn precision_at_k(predicted: &NeighborList, truth: &NeighborList, k: usize) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), found: predicted.len() });
    }
    if k == 0 || predicted.is_empty() {
        return Err(Error::InvalidParameter("precision needs k > 0 and at least one query".into()));
    }
    let mut total = 0.0;
    for q in 0..truth.len() {
        let (p, t) = (predicted.neighbors(q), truth.neighbors(q));
        if p.len() < k || t.len() < k {
            return Err(Error::InvalidParameter(format!("query {q} has fewer than {k} neighbors")));
        }
        let hits = p[..k].iter().filter(|(i, _)| t[..k].iter().any(|(j, _)| i == j)).count();
        total += hits as f64 / k as f64;
    }
    Ok(total / truth.len() as f64)
}

/// Mean silhouette over all points of a precomputed distance matrix.
/// Points in singleton clusters score 0, as do points whose `a` and `b` are both 0.
pub fn silhouette(dm: &DistanceMatrix, labels: &LabelVector) -> Result<f64> {
    let m = dm.len();
    if labels.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: labels.len() });
    }
    if labels.classes() < 2 {
        return Err(Error::TooFewClusters);
    }
    let sizes = labels.sizes();
    let l = labels.as_slice();
    let scores = crate::par::map_range(m, |i| {
        if sizes[l[i]] == 1 {
            return 0.0;
        }
        let mut sums = vec![0.0; labels.classes()];
        for j in 0..m {
            if j != i {
                sums[l[j]] += dm.get(i, j);
            }
        }
        let a = sums[l[i]] / (sizes[l[i]] - 1) as f64;
        let b = (0..labels.classes())
            .filter(|&c| c != l[i])
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let den = a.max(b);
        if den == 0.0 {
            0.0
        } else {
            (b - a) / den
        }
    });
    Ok(scores.iter().sum::<f64>() / m as f64)
}

struct Contingency {
    n: usize,
    table: Vec<usize>,
    rows: Vec<usize>,
    cols: Vec<usize>,
}

fn contingency(pred: &LabelVector, truth: &LabelVector) -> Result<Contingency> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), found: pred.len() });
    }
    if pred.is_empty() {
        return Err(Error::InvalidParameter("empty labelling".into()));
    }
    let (r, c) = (truth.classes(), pred.classes());
    let mut table = vec![0; r * c];
    for (&t, &p) in truth.as_slice().iter().zip(pred.as_slice()) {
        table[t * c + p] += 1;
    }
    Ok(Contingency { n: pred.len(), table, rows: truth.sizes(), cols: pred.sizes() })
}

fn comb2(x: usize) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand index.
pub fn ari(pred: &LabelVector, truth: &LabelVector) -> Result<f64> {
    let ct = contingency(pred, truth)?;
    let index: f64 = ct.table.iter().map(|&v| comb2(v)).sum();
    let sa: f64 = ct.rows.iter().map(|&v| comb2(v)).sum();
    let sb: f64 = ct.cols.iter().map(|&v| comb2(v)).sum();
    let total = comb2(ct.n);
    let expected = if total > 0.0 { sa * sb / total } else { 0.0 };
    let max = 0.5 * (sa + sb);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

fn entropy(sizes: &[usize], n: usize) -> f64 {
    let n = n as f64;
    sizes.iter().filter(|&&s| s > 0).map(|&s| -(s as f64 / n) * math::ln(s as f64 / n)).sum()
}

fn mutual_info(ct: &Contingency) -> f64 {
    let n = ct.n as f64;
    let c = ct.cols.len();
    let mut mi = 0.0;
    for (i, &a) in ct.rows.iter().enumerate() {
        for (j, &b) in ct.cols.iter().enumerate() {
            let v = ct.table[i * c + j];
            if v > 0 {
                let v = v as f64;
                mi += v / n * math::ln(n * v / (a as f64 * b as f64));
            }
        }
    }
    mi.max(0.0)
}

/// Normalised mutual information, arithmetic-mean normalisation.
pub fn nmi(pred: &LabelVector, truth: &LabelVector) -> Result<f64> {
    let ct = contingency(pred, truth)?;
    let (hu, hv) = (entropy(&ct.rows, ct.n), entropy(&ct.cols, ct.n));
    if hu == 0.0 && hv == 0.0 {
        return Ok(1.0);
    }
    Ok(mutual_info(&ct) / (0.5 * (hu + hv)))
}

/// Expected mutual information of two labellings with the given class sizes
/// under the hypergeometric (permutation) model.
fn expected_mutual_info(rows: &[usize], cols: &[usize], n: usize) -> f64 {
    let nf = n as f64;
    let lg = |x: usize| math::lgamma(x as f64 + 1.0);
    let lg_n = lg(n);
    let mut emi = 0.0;
    for &a in rows {
        for &b in cols {
            let lo = (a + b).saturating_sub(n).max(1);
            let hi = a.min(b);
            let fixed = lg(a) + lg(b) + lg(n - a) + lg(n - b) - lg_n;
            for nij in lo..=hi {
                let v = nij as f64;
                let term = v / nf * math::ln(nf * v / (a as f64 * b as f64));
                let log_p = fixed - lg(nij) - lg(a - nij) - lg(b - nij) - lg(n + nij - a - b);
                emi += term * math::exp(log_p);
            }
        }
    }
    emi
}

/// Adjusted mutual information, arithmetic-mean normalisation.
pub fn ami(pred: &LabelVector, truth: &LabelVector) -> Result<f64> {
    let ct = contingency(pred, truth)?;
    let (r, c) = (ct.rows.len(), ct.cols.len());
    if (r == 1 && c == 1) || (r == ct.n && c == ct.n) {
        return Ok(1.0);
    }
    let mi = mutual_info(&ct);
    let emi = expected_mutual_info(&ct.rows, &ct.cols, ct.n);
    let norm = 0.5 * (entropy(&ct.rows, ct.n) + entropy(&ct.cols, ct.n));
    let mut den = norm - emi;
    den = if den < 0.0 { den.min(-f64::EPSILON) } else { den.max(f64::EPSILON) };
    Ok((mi - emi) / den)
}

fn assignment_cost(dm: &DistanceMatrix, medoids: &[usize]) -> f64 {
    (0..dm.len()).map(|j| medoids.iter().map(|&c| dm.get(j, c)).fold(f64::INFINITY, f64::min)).sum()
}

/// k-medoids (PAM). BUILD starts from the point with the smallest total
/// distance and greedily adds the point with the largest cost reduction;
/// SWAP then applies the best improving medoid/non-medoid exchange until none
/// remains. No randomness is involved; ties go to the lowest index. Labels
/// number the medoids in ascending index order.
pub fn cluster_from_distances(dm: &DistanceMatrix, num_clusters: usize) -> Result<LabelVector> {
    let m = dm.len();
    if num_clusters == 0 || num_clusters > m {
        return Err(Error::InvalidParameter(format!("cannot form {num_clusters} clusters from {m} points")));
    }
    let totals: Vec<f64> = (0..m).map(|i| dm.row(i).iter().sum()).collect();
    let first = (0..m).min_by(|&a, &b| totals[a].total_cmp(&totals[b]).then(a.cmp(&b))).unwrap();
    let mut medoids = vec![first];
    let mut nearest: Vec<f64> = (0..m).map(|j| dm.get(j, first)).collect();
    while medoids.len() < num_clusters {
        let mut best = None;
        let mut best_gain = f64::NEG_INFINITY;
        for c in (0..m).filter(|c| !medoids.contains(c)) {
            let gain: f64 = (0..m).map(|j| (nearest[j] - dm.get(j, c)).max(0.0)).sum();
            if gain > best_gain {
                best_gain = gain;
                best = Some(c);
            }
        }
        let c = best.expect("a candidate remains while medoids < m");
        medoids.push(c);
        for j in 0..m {
            nearest[j] = nearest[j].min(dm.get(j, c));
        }
    }

    let mut cost = assignment_cost(dm, &medoids);
    let tol = 1e-12 * cost.abs().max(1.0);
    for _ in 0..10 * m * num_clusters + 100 {
        let mut best = None;
        let mut best_cost = cost - tol;
        for k in 0..medoids.len() {
            for o in (0..m).filter(|o| !medoids.contains(o)) {
                let mut trial = medoids.clone();
                trial[k] = o;
                let c = assignment_cost(dm, &trial);
                if c < best_cost {
                    best_cost = c;
                    best = Some((k, o));
                }
            }
        }
        match best {
            Some((k, o)) => {
                medoids[k] = o;
                cost = best_cost;
            }
            None => break,
        }
    }

    medoids.sort_unstable();
    let raw: Vec<usize> = (0..m)
        .map(|j| {
            (0..medoids.len())
                .min_by(|&a, &b| dm.get(j, medoids[a]).total_cmp(&dm.get(j, medoids[b])).then(a.cmp(&b)))
                .unwrap()
        })
        .collect();
    Ok(LabelVector { labels: raw, classes: num_clusters })
}
