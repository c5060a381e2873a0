//! Nearest-neighbor retrieval on the sphere-cluster dataset: every method
//! ranks the distributions, and P@k is measured against the ranking by
//! great-circle distance between the true means.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use udemd_core::eval::precision_at_k;
use udemd_core::generators::{gen_sphere_dataset, SphereConfig, SphereDataset};
use udemd_core::metric::{euclidean_matrix, knn, pairwise_l1, tv_matrix};
use udemd_core::ot::{sinkhorn, CostMatrix, SinkhornOptions};
use udemd_core::{geodesic_distances, udemd_embed, DiffusionOperator, DistanceMatrix, UdemdConfig, WalkOptions};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Udemd,
    /// Total variation between the raw signals.
    Tv,
    /// Total variation after one diffusion step.
    TvDiffused,
    Euclidean,
    Sinkhorn,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "udemd" => Ok(Method::Udemd),
            "tv" => Ok(Method::Tv),
            "tv-diffused" => Ok(Method::TvDiffused),
            "euclidean" => Ok(Method::Euclidean),
            "sinkhorn" => Ok(Method::Sinkhorn),
            other => Err(Error::Usage(format!("unknown method {other:?}"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Udemd => "udemd",
            Method::Tv => "tv",
            Method::TvDiffused => "tv-diffused",
            Method::Euclidean => "euclidean",
            Method::Sinkhorn => "sinkhorn",
        })
    }
}

/// Largest graph on which the Sinkhorn baseline is attempted.
pub const SINKHORN_MAX_NODES: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereExpConfig {
    pub m: usize,
    pub points_per: usize,
    pub noise_spike: bool,
    pub knn_k: usize,
    pub seed: u64,
    pub scales: Vec<u32>,
    pub alpha: f64,
    pub methods: Vec<Method>,
    /// Neighbors compared per query.
    pub k: usize,
    /// Entropic regularization relative to the largest cost of each pair.
    pub sinkhorn_epsilon: f64,
}

impl Default for SphereExpConfig {
    fn default() -> Self {
        Self {
            m: 200,
            points_per: 10,
            noise_spike: true,
            knn_k: 10,
            seed: 0,
            scales: vec![4],
            alpha: 0.5,
            methods: vec![Method::Udemd, Method::Tv, Method::Euclidean],
            k: 10,
            sinkhorn_epsilon: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<u32>,
    pub precision: Option<f64>,
    pub seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereReport {
    pub config: SphereExpConfig,
    pub nodes: usize,
    pub edges: usize,
    pub results: Vec<MethodResult>,
}

impl SphereReport {
    pub fn precision(&self, method: Method, scale: Option<u32>) -> Option<f64> {
        self.results.iter().find(|r| r.method == method && r.scale == scale).and_then(|r| r.precision)
    }
}

fn sinkhorn_matrix(data: &SphereDataset, rel_eps: f64) -> Result<DistanceMatrix> {
    let s = &data.signals;
    let m = s.signals();
    let supports: Vec<Vec<usize>> = s.columns().map(|c| (0..c.len()).filter(|&i| c[i] > 0.0).collect()).collect();
    let sources: Vec<usize> = supports.iter().flatten().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let geo = geodesic_distances(&data.graph, &sources)?;
    let row_of = |v: usize| sources.binary_search(&v).expect("support node is a source");
    let mut values = vec![0.0; m * m];
    for i in 0..m {
        for j in i + 1..m {
            let nodes: Vec<usize> =
                supports[i].iter().chain(&supports[j]).copied().collect::<BTreeSet<_>>().into_iter().collect();
            let q = nodes.len();
            let mut c = vec![0.0; q * q];
            for a in 0..q {
                for b in 0..q {
                    if a != b {
                        let d = geo.get(row_of(nodes[a]), nodes[b]);
                        c[a * q + b] = d.min(geo.get(row_of(nodes[b]), nodes[a]));
                    }
                }
            }
            let cost = CostMatrix::new(q, c)?;
            let mu: Vec<f64> = nodes.iter().map(|&v| s.get(v, i)).collect();
            let nu: Vec<f64> = nodes.iter().map(|&v| s.get(v, j)).collect();
            let eps = rel_eps * cost.max().max(f64::MIN_POSITIVE);
            let r = sinkhorn(&cost, &mu, &nu, &SinkhornOptions::new(eps))?;
            values[i * m + j] = r.cost;
            values[j * m + i] = r.cost;
        }
    }
    Ok(DistanceMatrix::new(m, values, "sinkhorn")?)
}

pub fn sphere_experiment(cfg: &SphereExpConfig) -> Result<SphereReport> {
    if cfg.methods.is_empty() {
        return Err(Error::Usage("no methods requested".into()));
    }
    if cfg.methods.contains(&Method::Udemd) && cfg.scales.is_empty() {
        return Err(Error::Usage("udemd needs at least one scale".into()));
    }
    let data = gen_sphere_dataset(&SphereConfig {
        points_per: cfg.points_per,
        noise_spike: cfg.noise_spike,
        knn_k: cfg.knn_k,
        ..SphereConfig::new(cfg.m, cfg.seed)
    })?;
    let n = data.graph.node_count();
    let truth = &data.ground_truth;
    let score = |dm: &DistanceMatrix| -> Result<f64> { Ok(precision_at_k(&knn(dm, cfg.k)?, truth, cfg.k)?) };
    let mut methods = cfg.methods.clone();
    methods.sort();
    methods.dedup();

    let mut results = Vec::new();
    for method in methods {
        match method {
            Method::Udemd => {
                for &k in &cfg.scales {
                    let start = Instant::now();
                    let op = DiffusionOperator::build(&data.graph, WalkOptions::default())?;
                    let e = udemd_embed(&op, &data.signals, &UdemdConfig { alpha: cfg.alpha, ..UdemdConfig::with_scale(k) })?;
                    let dm = pairwise_l1(e.data(), e.signals(), e.dim())?;
                    let precision = score(&dm)?;
                    let seconds = start.elapsed().as_secs_f64();
                    results.push(MethodResult { method, scale: Some(k), precision: Some(precision), seconds, skipped: None });
                }
            }
            Method::Sinkhorn if n > SINKHORN_MAX_NODES => results.push(MethodResult {
                method,
                scale: None,
                precision: None,
                seconds: 0.0,
                skipped: Some(format!("{n} nodes exceed the Sinkhorn cap of {SINKHORN_MAX_NODES}")),
            }),
            _ => {
                let start = Instant::now();
                let dm = match method {
                    Method::Tv => tv_matrix(&data.signals)?,
                    Method::TvDiffused => {
                        let op = DiffusionOperator::build(&data.graph, WalkOptions::default())?;
                        tv_matrix(&op.apply_diffusion(&data.signals, 1)?)?
                    }
                    Method::Euclidean => euclidean_matrix(&data.signals)?,
                    Method::Sinkhorn => sinkhorn_matrix(&data, cfg.sinkhorn_epsilon)?,
                    Method::Udemd => unreachable!(),
                };
                let precision = score(&dm)?;
                let seconds = start.elapsed().as_secs_f64();
                results.push(MethodResult { method, scale: None, precision: Some(precision), seconds, skipped: None });
            }
        }
    }
    Ok(SphereReport { config: cfg.clone(), nodes: n, edges: data.graph.edge_count(), results })
}
