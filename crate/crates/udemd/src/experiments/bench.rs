//! Wall-clock timing of the embedding over a grid of signal counts, graph
//! sizes and scales.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use udemd_core::generators::{knn_graph, random_distribution, random_unit_vector, rng};
use udemd_core::{stats, udemd_embed, DiffusionOperator, SignalSet, UdemdConfig, WalkOptions};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub ms: Vec<usize>,
    pub ns: Vec<usize>,
    pub scales: Vec<u32>,
    pub repeats: usize,
    pub seed: u64,
    /// Neighbors per point of the benchmark graph.
    pub knn_k: usize,
    /// Support size of each random signal.
    pub support: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self { ms: vec![250, 500, 1000, 2000], ns: vec![2000], scales: vec![4], repeats: 3, seed: 0, knn_k: 10, support: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub edges: usize,
    pub m: usize,
    pub k: u32,
    pub repeats: usize,
    pub median_seconds: f64,
    pub min_seconds: f64,
}

/// A kNN graph over `n` uniform points on the sphere.
pub fn bench_graph(n: usize, knn_k: usize, seed: u64) -> Result<udemd_core::Graph> {
    let mut r = rng(seed);
    let points: Vec<_> = (0..n).map(|_| random_unit_vector(&mut r)).collect();
    Ok(knn_graph(&points, knn_k.min(n.saturating_sub(1)))?)
}

pub fn bench_signals(n: usize, m: usize, support: usize, seed: u64) -> Result<SignalSet> {
    let mut r = rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    let cols: Vec<Vec<f64>> = (0..m).map(|_| random_distribution(n, support.clamp(1, n), &mut r)).collect();
    Ok(SignalSet::from_columns(n, &cols)?.normalize_columns()?)
}

pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.ms.is_empty() || cfg.ns.is_empty() || cfg.scales.is_empty() {
        return Err(Error::Usage("bench grid is empty: give at least one m, n and K".into()));
    }
    if cfg.repeats == 0 {
        return Err(Error::Usage("repeats must be positive".into()));
    }
    let mut rows = Vec::new();
    for &n in &cfg.ns {
        let g = bench_graph(n, cfg.knn_k, cfg.seed)?;
        let op = DiffusionOperator::build(&g, WalkOptions::default())?;
        for &m in &cfg.ms {
            let signals = bench_signals(n, m, cfg.support, cfg.seed)?;
            for &k in &cfg.scales {
                let ucfg = UdemdConfig::with_scale(k);
                // untimed warm-up: first-touch page faults and cold caches
                std::hint::black_box(udemd_embed(&op, &signals, &ucfg)?);
                let times = (0..cfg.repeats)
                    .map(|_| {
                        let start = Instant::now();
                        let e = udemd_embed(&op, &signals, &ucfg)?;
                        let t = start.elapsed().as_secs_f64();
                        std::hint::black_box(e);
                        Ok(t)
                    })
                    .collect::<Result<Vec<f64>>>()?;
                rows.push(BenchRow {
                    n,
                    edges: g.edge_count(),
                    m,
                    k,
                    repeats: cfg.repeats,
                    median_seconds: stats::median(&times).unwrap_or(f64::NAN),
                    min_seconds: times.iter().copied().fold(f64::INFINITY, f64::min),
                });
            }
        }
    }
    Ok(rows)
}

pub const CSV_HEADER: &str = "n,edges,m,K,repeats,median_seconds,min_seconds";

pub fn write_csv<W: Write>(rows: &[BenchRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{},{},{}", r.n, r.edges, r.m, r.k, r.repeats, r.median_seconds, r.min_seconds)?;
    }
    Ok(())
}
