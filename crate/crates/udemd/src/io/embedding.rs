//! Embedding persistence. The binary form stores the full header (sizes,
//! scale, alpha, weight sign, band layout and weights, subsample descriptor,
//! graph fingerprint) followed by the row-major payload; the text form holds
//! the same fields with shortest round-trip decimal floats.

use std::fmt::Write as _;
use std::path::Path;

use udemd_core::{MultiscaleEmbedding, Subsample, UdemdConfig, WeightSign};

use super::binary;
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"UDEMDEMB";
const VERSION: u8 = 1;
const TEXT_HEADER: &str = "# udemd embedding v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingFormat {
    Binary,
    Text,
}

impl EmbeddingFormat {
    /// `.txt` selects text, anything else binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|s| s.to_str()) {
            Some("txt") => EmbeddingFormat::Text,
            _ => EmbeddingFormat::Binary,
        }
    }
}

fn sign_code(s: WeightSign) -> u8 {
    match s {
        WeightSign::CoarseHeavy => 0,
        WeightSign::FineHeavy => 1,
    }
}

fn sign_from(code: u8) -> Result<WeightSign> {
    match code {
        0 => Ok(WeightSign::CoarseHeavy),
        1 => Ok(WeightSign::FineHeavy),
        c => Err(Error::VersionMismatch(format!("unknown weight sign {c}"))),
    }
}

pub fn encode_binary(e: &MultiscaleEmbedding) -> Vec<u8> {
    let cfg = e.config();
    let mut w = binary::Writer::new(MAGIC, VERSION);
    w.u64(e.nodes() as u64);
    w.u64(e.signals() as u64);
    w.u64(cfg.max_scale as u64);
    w.f64(cfg.alpha);
    w.u8(sign_code(cfg.weight_sign));
    w.u8(cfg.keep_mass as u8);
    match cfg.subsample {
        Subsample::None => w.u8(0),
        Subsample::Uniform { rate, seed } => {
            w.u8(1);
            w.f64(rate);
            w.u64(seed);
        }
    }
    w.u64(e.graph_fingerprint());
    w.u64(e.band_count() as u64);
    e.band_offsets().iter().for_each(|&o| w.u64(o as u64));
    w.f64s(e.weights());
    w.f64s(e.data());
    w.finish()
}

pub fn decode_binary(bytes: &[u8]) -> Result<MultiscaleEmbedding> {
    let mut r = binary::Reader::open(bytes, MAGIC, VERSION)?;
    let nodes = r.usize()?;
    let signals = r.usize()?;
    let max_scale = u32::try_from(r.u64()?).map_err(|_| Error::ChecksumFailure("scale out of range".into()))?;
    let alpha = r.f64()?;
    let weight_sign = sign_from(r.u8()?)?;
    let keep_mass = r.u8()? != 0;
    let subsample = match r.u8()? {
        0 => Subsample::None,
        1 => Subsample::Uniform { rate: r.f64()?, seed: r.u64()? },
        c => return Err(Error::VersionMismatch(format!("unknown subsample tag {c}"))),
    };
    let fingerprint = r.u64()?;
    let bands = r.usize()?;
    let offsets = (0..=bands).map(|_| r.usize()).collect::<Result<Vec<_>>>()?;
    let weights = r.f64s(bands)?;
    let dim = *offsets.last().unwrap_or(&0);
    let data = r.f64s(signals.checked_mul(dim).ok_or_else(|| Error::ChecksumFailure("size overflow".into()))?)?;
    r.finish()?;
    let config = UdemdConfig { max_scale, alpha, weight_sign, subsample, keep_mass };
    Ok(MultiscaleEmbedding::from_parts(nodes, signals, data, offsets, weights, config, fingerprint)?)
}

fn join<T: ToString>(v: impl IntoIterator<Item = T>) -> String {
    v.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn encode_text(e: &MultiscaleEmbedding) -> String {
    let cfg = e.config();
    let mut s = String::new();
    let _ = writeln!(s, "{TEXT_HEADER}");
    let _ = writeln!(s, "nodes {}", e.nodes());
    let _ = writeln!(s, "signals {}", e.signals());
    let _ = writeln!(s, "scales {}", cfg.max_scale);
    let _ = writeln!(s, "alpha {}", cfg.alpha);
    let _ = writeln!(s, "weight_sign {}", sign_code(cfg.weight_sign));
    let _ = writeln!(s, "keep_mass {}", cfg.keep_mass as u8);
    match cfg.subsample {
        Subsample::None => {
            let _ = writeln!(s, "subsample none");
        }
        Subsample::Uniform { rate, seed } => {
            let _ = writeln!(s, "subsample uniform {rate} {seed}");
        }
    }
    let _ = writeln!(s, "fingerprint {:016x}", e.graph_fingerprint());
    let _ = writeln!(s, "band_offsets {}", join(e.band_offsets()));
    let _ = writeln!(s, "weights {}", join(e.weights()));
    let _ = writeln!(s, "data");
    for i in 0..e.signals() {
        let _ = writeln!(s, "{}", join(e.row(i)));
    }
    s
}

pub fn decode_text(text: &str) -> Result<MultiscaleEmbedding> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l.trim() == TEXT_HEADER => {}
        _ => return Err(Error::VersionMismatch("missing text embedding header".into())),
    }
    let mut field = |key: &str| -> Result<(usize, Vec<String>)> {
        let (no, line) = lines.next().ok_or_else(|| Error::ChecksumFailure(format!("missing `{key}`")))?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(key) {
            return Err(Error::parse(no, format!("expected `{key}`")));
        }
        Ok((no, parts.map(str::to_string).collect()))
    };
    fn one<T: std::str::FromStr>(f: (usize, Vec<String>)) -> Result<T> {
        match f.1.as_slice() {
            [v] => v.parse().map_err(|_| Error::parse(f.0, format!("bad value {v:?}"))),
            _ => Err(Error::parse(f.0, "expected one value")),
        }
    }
    fn many<T: std::str::FromStr>(f: (usize, Vec<String>)) -> Result<Vec<T>> {
        f.1.iter().map(|v| v.parse().map_err(|_| Error::parse(f.0, format!("bad value {v:?}")))).collect()
    }
    let nodes: usize = one(field("nodes")?)?;
    let signals: usize = one(field("signals")?)?;
    let max_scale: u32 = one(field("scales")?)?;
    let alpha: f64 = one(field("alpha")?)?;
    let weight_sign = sign_from(one(field("weight_sign")?)?)?;
    let keep_mass = one::<u8>(field("keep_mass")?)? != 0;
    let (no, sub) = field("subsample")?;
    let subsample = match sub.as_slice() {
        [k] if k == "none" => Subsample::None,
        [k, rate, seed] if k == "uniform" => Subsample::Uniform {
            rate: rate.parse().map_err(|_| Error::parse(no, "bad rate"))?,
            seed: seed.parse().map_err(|_| Error::parse(no, "bad seed"))?,
        },
        _ => return Err(Error::parse(no, "bad subsample descriptor")),
    };
    let (no, fp) = field("fingerprint")?;
    let fingerprint = match fp.as_slice() {
        [h] => u64::from_str_radix(h, 16).map_err(|_| Error::parse(no, "bad fingerprint"))?,
        _ => return Err(Error::parse(no, "bad fingerprint")),
    };
    let offsets: Vec<usize> = many(field("band_offsets")?)?;
    let weights: Vec<f64> = many(field("weights")?)?;
    field("data")?;
    let mut data = Vec::new();
    let mut rows = 0;
    for (no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = many((no, line.split_whitespace().map(str::to_string).collect()))?;
        data.extend(row);
        rows += 1;
    }
    if rows != signals {
        return Err(Error::ChecksumFailure(format!("expected {signals} rows, found {rows}")));
    }
    let config = UdemdConfig { max_scale, alpha, weight_sign, subsample, keep_mass };
    Ok(MultiscaleEmbedding::from_parts(nodes, signals, data, offsets, weights, config, fingerprint)?)
}

pub fn save_embedding(e: &MultiscaleEmbedding, path: &Path) -> Result<()> {
    use std::io::Write;
    let bytes = match EmbeddingFormat::from_path(path) {
        EmbeddingFormat::Binary => encode_binary(e),
        EmbeddingFormat::Text => encode_text(e).into_bytes(),
    };
    super::write_with(path, |w| w.write_all(&bytes))
}

pub fn load_embedding(path: &Path) -> Result<MultiscaleEmbedding> {
    let bytes = super::read_all(path)?;
    match EmbeddingFormat::from_path(path) {
        EmbeddingFormat::Binary => decode_binary(&bytes),
        EmbeddingFormat::Text => {
            let text = std::str::from_utf8(&bytes).map_err(|_| Error::parse(0, "embedding text is not UTF-8"))?;
            decode_text(text)
        }
    }
}
