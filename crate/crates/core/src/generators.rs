//! Synthetic graphs and signal datasets. All generators are pure functions of
//! their parameters and seed (ChaCha8 streams).

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::graph::{Edge, Graph};
use crate::math;
use crate::metric::NeighborList;
use crate::signal::SignalSet;
use crate::{Error, Result};

pub type Point3 = [f64; 3];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Cycle graph `0 - 1 - .. - (n-1) - 0` with unit weights.
pub fn gen_ring(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::InvalidParameter(alloc::format!("a ring needs at least 3 nodes, got {n}")));
    }
    let edges = (0..n).map(|i| Edge::unit(i, (i + 1) % n));
    Ok(Graph::from_edges(Some(n), edges)?.0)
}

/// Random geometric graph on the unit square: nodes closer than `radius` are
/// joined. Resampled until connected. With `weighted`, edge weights are the
/// Euclidean lengths; otherwise unit weights.
pub fn random_geometric_graph<R: Rng>(n: usize, radius: f64, weighted: bool, rng: &mut R) -> Result<Graph> {
    if n < 2 || radius <= 0.0 {
        return Err(Error::InvalidParameter("random geometric graph needs n >= 2 and radius > 0".into()));
    }
    for _ in 0..10_000 {
        let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let d = {
                    let (dx, dy) = (pts[i].0 - pts[j].0, pts[i].1 - pts[j].1);
                    math::sqrt(dx * dx + dy * dy)
                };
                if d < radius {
                    edges.push(Edge::new(i, j, if weighted { d } else { 1.0 }));
                }
            }
        }
        if let Ok((g, _)) = Graph::from_edges(Some(n), edges) {
            return Ok(g);
        }
    }
    Err(Error::InvalidParameter(alloc::format!("radius {radius} too small to connect {n} nodes")))
}

/// Random probability vector on `support` distinct nodes with weights drawn
/// uniformly from `[0.1, 1.1)` before normalization.
pub fn random_distribution<R: Rng>(n: usize, support: usize, rng: &mut R) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for i in sample(rng, n, support.clamp(1, n)).into_iter() {
        x[i] = 0.1 + rng.random::<f64>();
    }
    let s: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= s);
    x
}

pub fn random_unit_vector<R: Rng>(rng: &mut R) -> Point3 {
    loop {
        let v: Point3 = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let norm = math::sqrt(dot(&v, &v));
        if norm > 1e-12 {
            return [v[0] / norm, v[1] / norm, v[2] / norm];
        }
    }
}

fn dot(a: &Point3, b: &Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalize(v: Point3) -> Point3 {
    let norm = math::sqrt(dot(&v, &v));
    [v[0] / norm, v[1] / norm, v[2] / norm]
}

fn sq_dist(a: &Point3, b: &Point3) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    dot(&d, &d)
}

/// Great-circle distance between unit vectors.
pub fn great_circle(a: &Point3, b: &Point3) -> f64 {
    math::acos(dot(a, b).clamp(-1.0, 1.0))
}

/// Symmetric k-nearest-neighbor graph with unit weights (an edge whenever
/// either endpoint lists the other). Leftover components are bridged to the
/// rest by their closest point pair.
pub fn knn_graph(points: &[Point3], k: usize) -> Result<Graph> {
    let n = points.len();
    if k == 0 || k >= n {
        return Err(Error::KTooLarge { k, m: n });
    }
    let lists = crate::par::map_range(n, |i| {
        let mut cand: Vec<(f64, usize)> =
            (0..n).filter(|&j| j != i).map(|j| (sq_dist(&points[i], &points[j]), j)).collect();
        cand.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        cand.truncate(k);
        cand.into_iter().map(|(_, j)| j).collect::<Vec<_>>()
    });
    let mut edges: Vec<Edge> = Vec::with_capacity(n * k);
    for (i, list) in lists.iter().enumerate() {
        for &j in list {
            edges.push(Edge::unit(i.min(j), i.max(j)));
        }
    }
    edges.sort_by(|a, b| (a.src, a.dst).cmp(&(b.src, b.dst)));
    edges.dedup();
    loop {
        let comp = components(n, &edges);
        let count = comp.iter().copied().max().map_or(0, |c| c + 1);
        if count <= 1 {
            break;
        }
        // bridge component 0 to its nearest outside point
        let mut best = (f64::INFINITY, 0, 0);
        for i in (0..n).filter(|&i| comp[i] == 0) {
            for j in (0..n).filter(|&j| comp[j] != 0) {
                let d = sq_dist(&points[i], &points[j]);
                if d < best.0 {
                    best = (d, i, j);
                }
            }
        }
        edges.push(Edge::unit(best.1.min(best.2), best.1.max(best.2)));
    }
    Ok(Graph::from_edges(Some(n), edges)?.0)
}

fn components(n: usize, edges: &[Edge]) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for e in edges {
        let (a, b) = (find(&mut parent, e.src), find(&mut parent, e.dst));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut out = vec![0; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if label[r] == usize::MAX {
            label[r] = next;
            next += 1;
        }
        out[i] = label[r];
    }
    out
}

/// Planted higher-level structure: distribution means are drawn around a few
/// mutually orthogonal centers instead of uniformly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedGroups {
    /// Number of groups, at most 3 (one per axis of a random frame).
    pub count: usize,
    /// Standard deviation of the isotropic 3D offset of each mean around its center.
    pub spread: f64,
}

/// Parameters of the sphere-cluster dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereConfig {
    /// Number of distributions.
    pub m: usize,
    pub points_per: usize,
    /// Isotropic 3D standard deviation around each mean before projecting to the sphere.
    pub sigma: f64,
    pub knn_k: usize,
    /// Add one uniformly placed spike point per distribution.
    pub noise_spike: bool,
    /// Fraction of each distribution's mass carried by its spike.
    pub spike_mass: f64,
    pub planted: Option<PlantedGroups>,
    pub seed: u64,
}

impl SphereConfig {
    pub fn new(m: usize, seed: u64) -> Self {
        Self {
            m,
            points_per: 10,
            sigma: 0.1,
            knn_k: 10,
            noise_spike: false,
            spike_mass: 0.1,
            planted: None,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SphereDataset {
    pub graph: Graph,
    /// Normalized signals, one column per distribution.
    pub signals: SignalSet,
    pub points: Vec<Point3>,
    pub means: Vec<Point3>,
    /// Distribution owning each point (spikes belong to their distribution).
    pub owner: Vec<usize>,
    /// For every distribution, all others ranked by great-circle distance between means.
    pub ground_truth: NeighborList,
    /// Planted group of each distribution, when requested.
    pub groups: Option<Vec<usize>>,
}

/// Gaussian clusters on the unit sphere with a kNN graph over all points.
pub fn gen_sphere_dataset(cfg: &SphereConfig) -> Result<SphereDataset> {
    if cfg.points_per == 0 {
        return Err(Error::DegenerateCluster);
    }
    if cfg.m < 2 {
        return Err(Error::InvalidParameter(alloc::format!("need at least 2 distributions, got {}", cfg.m)));
    }
    if cfg.noise_spike && !(0.0..1.0).contains(&cfg.spike_mass) {
        return Err(Error::InvalidParameter("spike mass must lie in [0, 1)".into()));
    }
    let mut rng = rng(cfg.seed);
    let (means, groups) = match cfg.planted {
        None => ((0..cfg.m).map(|_| random_unit_vector(&mut rng)).collect::<Vec<_>>(), None),
        Some(p) => {
            if p.count == 0 || p.count > 3 {
                return Err(Error::InvalidParameter("planted group count must be 1..=3".into()));
            }
            let frame = random_frame(&mut rng);
            let mut means = Vec::with_capacity(cfg.m);
            let mut labels = Vec::with_capacity(cfg.m);
            for i in 0..cfg.m {
                let g = i * p.count / cfg.m;
                let c = frame[g];
                let v: Point3 = [
                    c[0] + p.spread * rng.sample::<f64, _>(StandardNormal),
                    c[1] + p.spread * rng.sample::<f64, _>(StandardNormal),
                    c[2] + p.spread * rng.sample::<f64, _>(StandardNormal),
                ];
                means.push(normalize(v));
                labels.push(g);
            }
            (means, Some(labels))
        }
    };

    let mut points = Vec::new();
    let mut owner = Vec::new();
    for (i, mean) in means.iter().enumerate() {
        for _ in 0..cfg.points_per {
            let v: Point3 = [
                mean[0] + cfg.sigma * rng.sample::<f64, _>(StandardNormal),
                mean[1] + cfg.sigma * rng.sample::<f64, _>(StandardNormal),
                mean[2] + cfg.sigma * rng.sample::<f64, _>(StandardNormal),
            ];
            points.push(normalize(v));
            owner.push(i);
        }
    }
    if cfg.noise_spike {
        for i in 0..cfg.m {
            points.push(random_unit_vector(&mut rng));
            owner.push(i);
        }
    }
    let n = points.len();
    let graph = knn_graph(&points, cfg.knn_k.min(n - 1))?;

    let spike = if cfg.noise_spike { cfg.spike_mass } else { 0.0 };
    let mut values = vec![0.0; n * cfg.m];
    for i in 0..cfg.m {
        let col = &mut values[i * n..(i + 1) * n];
        for p in 0..cfg.points_per {
            col[i * cfg.points_per + p] = (1.0 - spike) / cfg.points_per as f64;
        }
        if cfg.noise_spike {
            col[cfg.m * cfg.points_per + i] = spike;
        }
    }
    let signals = SignalSet::from_column_major(n, cfg.m, values)?.normalize_columns()?;

    let ground_truth = NeighborList::from_rankings(
        (0..cfg.m)
            .map(|i| {
                let mut r: Vec<(usize, f64)> = (0..cfg.m)
                    .filter(|&j| j != i)
                    .map(|j| (j, great_circle(&means[i], &means[j])))
                    .collect();
                r.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
                r
            })
            .collect(),
    );
    Ok(SphereDataset { graph, signals, points, means, owner, ground_truth, groups })
}

fn random_frame<R: Rng>(rng: &mut R) -> [Point3; 3] {
    let a = random_unit_vector(rng);
    let mut b = random_unit_vector(rng);
    let d = dot(&a, &b);
    b = normalize([b[0] - d * a[0], b[1] - d * a[1], b[2] - d * a[2]]);
    let c = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    [a, b, c]
}
