//! Multiscale diffusion embedding whose L1 metric is the unbalanced diffusion EMD.
//!
//! For a signal `mu` and maximum scale `K`, the dyadic diffusions
//! `mu_k = (P^T)^(2^k) mu` for `k = 0..=K` are formed by cumulative
//! push-forward steps (`2^K` steps in total). The embedding concatenates
//!
//! ```text
//! band k (k < K):  w_k * (mu_{k+1} - mu_k),   w_k = 2^(-(K - k - 1) * alpha)
//! band K:          mu_K
//! ```
//!
//! so coarse differences weigh more than fine ones and the last band is the
//! plain low-pass signal. The distance between two signals is the L1 distance
//! between their embeddings; because diffusion beyond `2^K` steps is never
//! seen, mass separated by much more than `2^K` hops costs a bounded amount,
//! which behaves like transport under a ground distance truncated near `2^K`.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample;

use crate::diffusion::DiffusionOperator;
use crate::math;
use crate::metric::l1;
use crate::signal::SignalSet;
use crate::{Error, Result};

/// Largest admitted maximum scale; `2^K` push-forward steps must stay feasible.
pub const MAX_SCALE_CAP: u32 = 30;

/// Sign of the band-weight exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum WeightSign {
    /// `w_k = 2^(-(K-k-1) alpha)`: coarse bands weigh more.
    #[default]
    CoarseHeavy,
    /// `w_k = 2^((K-k-1) alpha)`: the mirrored weighting, kept for comparison.
    FineHeavy,
}

/// Post-processing of the assembled embedding.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case", tag = "kind"))]
pub enum Subsample {
    #[default]
    None,
    /// Keep `round(rate * len)` uniformly chosen coordinates of every band
    /// (the same coordinates for every signal) and scale them by `1 / rate`.
    Uniform { rate: f64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UdemdConfig {
    /// Maximum scale `K`.
    pub max_scale: u32,
    /// Snowflake exponent, `0 < alpha <= 1/2`.
    pub alpha: f64,
    pub weight_sign: WeightSign,
    pub subsample: Subsample,
    /// Embed signals that were not normalized to unit mass.
    pub keep_mass: bool,
}

impl Default for UdemdConfig {
    fn default() -> Self {
        Self { max_scale: 4, alpha: 0.5, weight_sign: WeightSign::CoarseHeavy, subsample: Subsample::None, keep_mass: false }
    }
}

impl UdemdConfig {
    pub fn with_scale(max_scale: u32) -> Self {
        Self { max_scale, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 0.5) {
            return Err(Error::InvalidParameter(alloc::format!("alpha must lie in (0, 1/2], got {}", self.alpha)));
        }
        if self.max_scale > MAX_SCALE_CAP {
            return Err(Error::InvalidParameter(alloc::format!(
                "max scale {} exceeds the cap {MAX_SCALE_CAP}",
                self.max_scale
            )));
        }
        if let Subsample::Uniform { rate, .. } = self.subsample {
            if !(rate > 0.0 && rate <= 1.0) {
                return Err(Error::InvalidParameter(alloc::format!("subsample rate must lie in (0, 1], got {rate}")));
            }
        }
        Ok(())
    }

    /// Weights of the `K` difference bands followed by the final band's weight 1.
    pub fn band_weights(&self) -> Vec<f64> {
        let k_max = self.max_scale as f64;
        let sign = match self.weight_sign {
            WeightSign::CoarseHeavy => -1.0,
            WeightSign::FineHeavy => 1.0,
        };
        let mut w: Vec<f64> =
            (0..self.max_scale).map(|k| math::exp2(sign * (k_max - k as f64 - 1.0) * self.alpha)).collect();
        w.push(1.0);
        w
    }
}

/// `m x dim` embedding, one row per signal, `K + 1` bands per row.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiscaleEmbedding {
    nodes: usize,
    signals: usize,
    dim: usize,
    data: Vec<f64>,
    band_offsets: Vec<usize>,
    weights: Vec<f64>,
    config: UdemdConfig,
    graph_fingerprint: u64,
}

impl MultiscaleEmbedding {
    /// Reassembles an embedding from stored parts, checking the shape.
    pub fn from_parts(
        nodes: usize,
        signals: usize,
        data: Vec<f64>,
        band_offsets: Vec<usize>,
        weights: Vec<f64>,
        config: UdemdConfig,
        graph_fingerprint: u64,
    ) -> Result<Self> {
        let dim = *band_offsets.last().unwrap_or(&0);
        let bands = config.max_scale as usize + 1;
        if band_offsets.len() != bands + 1 || band_offsets[0] != 0 || band_offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter("band offsets inconsistent with the scale".into()));
        }
        if weights.len() != bands {
            return Err(Error::DimensionMismatch { expected: bands, found: weights.len() });
        }
        if data.len() != signals * dim {
            return Err(Error::DimensionMismatch { expected: signals * dim, found: data.len() });
        }
        Ok(Self { nodes, signals, dim, data, band_offsets, weights, config, graph_fingerprint })
    }

    /// Graph node count `n` the embedding was computed on.
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn signals(&self) -> usize {
        self.signals
    }

    /// Coordinates per signal; `(K + 1) n` unless subsampled.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn band_count(&self) -> usize {
        self.band_offsets.len() - 1
    }

    pub fn band_offsets(&self) -> &[usize] {
        &self.band_offsets
    }

    /// Band `k` of signal `i`.
    pub fn band(&self, i: usize, k: usize) -> &[f64] {
        &self.row(i)[self.band_offsets[k]..self.band_offsets[k + 1]]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn config(&self) -> &UdemdConfig {
        &self.config
    }

    pub fn graph_fingerprint(&self) -> u64 {
        self.graph_fingerprint
    }
}

/// Embeds every signal column.
pub fn udemd_embed(op: &DiffusionOperator, signals: &SignalSet, cfg: &UdemdConfig) -> Result<MultiscaleEmbedding> {
    cfg.validate()?;
    signals.check_nodes(op.node_count())?;
    if !signals.is_normalized() && !cfg.keep_mass {
        return Err(Error::Unnormalized);
    }
    let n = op.node_count();
    let m = signals.signals();
    let k_max = cfg.max_scale as usize;
    let weights = cfg.band_weights();
    let dim = (k_max + 1) * n;
    let mut data = vec![0.0; m * dim];

    crate::par::for_each_chunk(&mut data, dim, |j, row| {
        let mut prev = vec![0.0; n];
        op.step_into(signals.column(j), &mut prev);
        let mut cur = prev.clone();
        let mut scratch = vec![0.0; n];
        for k in 0..k_max {
            op.advance(&mut cur, &mut scratch, 1usize << k);
            let band = &mut row[k * n..(k + 1) * n];
            for ((b, c), p) in band.iter_mut().zip(&cur).zip(&prev) {
                *b = weights[k] * (c - p);
            }
            prev.copy_from_slice(&cur);
        }
        row[k_max * n..].copy_from_slice(&prev);
    });
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue("embedding"));
    }
    let band_offsets = (0..=k_max + 1).map(|k| k * n).collect();
    let full = MultiscaleEmbedding {
        nodes: n,
        signals: m,
        dim,
        data,
        band_offsets,
        weights,
        config: *cfg,
        graph_fingerprint: op.graph_fingerprint(),
    };
    match cfg.subsample {
        Subsample::None => Ok(full),
        desc => subsample_embedding(&full, desc),
    }
}

/// L1 distance between embedding rows `i` and `j`.
pub fn udemd_distance(e: &MultiscaleEmbedding, i: usize, j: usize) -> Result<f64> {
    for idx in [i, j] {
        if idx >= e.signals {
            return Err(Error::IndexOutOfRange { index: idx, len: e.signals });
        }
    }
    Ok(l1(e.row(i), e.row(j)))
}

/// Keeps a seeded uniform subset of every band's coordinates.
pub fn subsample_embedding(e: &MultiscaleEmbedding, descriptor: Subsample) -> Result<MultiscaleEmbedding> {
    let (rate, seed) = match descriptor {
        Subsample::None => return Ok(e.clone()),
        Subsample::Uniform { rate, seed } => (rate, seed),
    };
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("subsample rate must lie in (0, 1], got {rate}")));
    }
    let mut config = e.config;
    config.subsample = descriptor;
    if rate == 1.0 {
        return Ok(MultiscaleEmbedding { config, ..e.clone() });
    }
    let mut rng = crate::generators::rng(seed);
    let mut keep: Vec<usize> = Vec::new();
    let mut band_offsets = vec![0usize];
    for k in 0..e.band_count() {
        let (lo, hi) = (e.band_offsets[k], e.band_offsets[k + 1]);
        let len = hi - lo;
        let count = math::round(rate * len as f64) as usize;
        if count == 0 {
            return Err(Error::EmptyBandAfterSubsample(k));
        }
        let mut idx: Vec<usize> = sample(&mut rng, len, count).into_iter().map(|x| lo + x).collect();
        idx.sort_unstable();
        keep.extend_from_slice(&idx);
        band_offsets.push(keep.len());
    }
    let dim = keep.len();
    let scale = 1.0 / rate;
    let mut data = Vec::with_capacity(e.signals * dim);
    for i in 0..e.signals {
        let row = e.row(i);
        data.extend(keep.iter().map(|&c| row[c] * scale));
    }
    Ok(MultiscaleEmbedding { dim, data, band_offsets, config, ..e.clone() })
}
