//! UDEMD between a dirac at node 0 and diracs at every other node of a ring,
//! compared with the thresholded ring geodesic `min(2^K, g)`.

use std::io::Write;

use serde::{Deserialize, Serialize};
use udemd_core::generators::gen_ring;
use udemd_core::{geodesic_distances, stats, udemd_distance, udemd_embed, DiffusionOperator, SignalSet, UdemdConfig, WalkOptions};

use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingConfig {
    pub n: usize,
    pub scales: Vec<u32>,
    pub alpha: f64,
    /// Holding probability of the walk; the even ring is bipartite.
    pub laziness: f64,
}

impl Default for RingConfig {
    fn default() -> Self {
        Self { n: 500, scales: vec![2, 3, 4, 5], alpha: 0.5, laziness: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingRow {
    pub k: u32,
    pub j: usize,
    pub geodesic: f64,
    pub truncated: f64,
    pub udemd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingSummary {
    pub k: u32,
    /// Spearman correlation of the curve with `min(2^K, g)` over `j >= 1`.
    pub spearman: Option<f64>,
    pub plateau: f64,
    /// First `j >= 1` where the curve reaches 95% of its plateau.
    pub onset: Option<usize>,
}

/// One row per `(K, j)` with `j = 0..=n/2`.
pub fn ring_experiment(cfg: &RingConfig) -> Result<Vec<RingRow>> {
    let g = gen_ring(cfg.n)?;
    let op = DiffusionOperator::build(&g, WalkOptions::lazy(cfg.laziness))?;
    let half = cfg.n / 2;
    let nodes: Vec<usize> = (0..=half).collect();
    let signals = SignalSet::diracs(cfg.n, &nodes)?;
    let geo = geodesic_distances(&g, &[0])?;
    let mut rows = Vec::with_capacity(cfg.scales.len() * nodes.len());
    for &k in &cfg.scales {
        let ucfg = UdemdConfig { alpha: cfg.alpha, ..UdemdConfig::with_scale(k) };
        let e = udemd_embed(&op, &signals, &ucfg)?;
        let lambda = (k as f64).exp2();
        for j in 0..=half {
            let geodesic = geo.get(0, j);
            rows.push(RingRow { k, j, geodesic, truncated: geodesic.min(lambda), udemd: udemd_distance(&e, 0, j)? });
        }
    }
    Ok(rows)
}

pub fn summarize(rows: &[RingRow]) -> Vec<RingSummary> {
    let mut ks: Vec<u32> = rows.iter().map(|r| r.k).collect();
    ks.dedup();
    ks.into_iter()
        .map(|k| {
            let curve: Vec<&RingRow> = rows.iter().filter(|r| r.k == k && r.j >= 1).collect();
            let u: Vec<f64> = curve.iter().map(|r| r.udemd).collect();
            let t: Vec<f64> = curve.iter().map(|r| r.truncated).collect();
            let plateau = u.iter().copied().fold(0.0, f64::max);
            let onset = curve.iter().find(|r| r.udemd >= 0.95 * plateau).map(|r| r.j);
            RingSummary { k, spearman: stats::spearman(&u, &t), plateau, onset }
        })
        .collect()
}

pub const CSV_HEADER: &str = "K,j,geodesic,truncated,udemd";

pub fn write_csv<W: Write>(rows: &[RingRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{}", r.k, r.j, r.geodesic, r.truncated, r.udemd)?;
    }
    Ok(())
}

/// Reads back a file written by [`write_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<RingRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(crate::Error::parse(1, format!("expected header {CSV_HEADER:?}"))),
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let f = crate::io::fields(l);
            if f.len() != 5 {
                return Err(crate::Error::parse(i + 1, format!("expected 5 fields, found {}", f.len())));
            }
            let int = |s: &str| s.parse::<u64>().map_err(|_| crate::Error::parse(i + 1, format!("bad integer {s:?}")));
            Ok(RingRow {
                k: int(f[0])? as u32,
                j: int(f[1])? as usize,
                geodesic: crate::io::number(f[2], i + 1)?,
                truncated: crate::io::number(f[3], i + 1)?,
                udemd: crate::io::number(f[4], i + 1)?,
            })
        })
        .collect()
}
