//! Signal matrices: dense CSV (rows are nodes, columns are signals, optional
//! label header), coordinate-list CSV (`node,signal,value`) and a dense
//! little-endian binary form.

use std::io::{BufRead, Write};
use std::path::Path;

use udemd_core::SignalSet;

use super::binary;
use super::{fields, number};
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"UDEMDSIG";
const VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalFormat {
    Csv,
    Coo,
    Binary,
}

impl SignalFormat {
    /// `.bin` is binary, `.coo` or `.coo.csv` coordinate list, anything else dense CSV.
    pub fn from_path(path: &Path) -> Self {
        let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("");
        if name.ends_with(".bin") {
            SignalFormat::Binary
        } else if name.ends_with(".coo") || name.ends_with(".coo.csv") {
            SignalFormat::Coo
        } else {
            SignalFormat::Csv
        }
    }
}

fn check_entry(v: f64, row: usize, col: usize) -> Result<f64> {
    if v < 0.0 {
        return Err(Error::NegativeEntry { row, col, value: v });
    }
    Ok(v)
}

/// Dense CSV. The first line is a label header when any of its fields is not
/// a number. `n` is the expected row count.
pub fn parse_csv<R: BufRead>(reader: R, n: Option<usize>) -> Result<SignalSet> {
    let mut labels = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let f = fields(&line);
        if rows.is_empty() && labels.is_none() && f.iter().any(|s| s.parse::<f64>().is_err()) {
            labels = Some(f.iter().map(|s| s.to_string()).collect::<Vec<_>>());
            continue;
        }
        let row = rows.len();
        let values = f
            .iter()
            .enumerate()
            .map(|(col, s)| check_entry(number(s, lineno)?, row, col))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if values.len() != first.len() {
                return Err(Error::parse(lineno, format!("expected {} columns, found {}", first.len(), values.len())));
            }
        }
        rows.push(values);
    }
    if let Some(n) = n {
        if rows.len() != n {
            return Err(Error::RowCountMismatch { expected: n, found: rows.len() });
        }
    }
    if rows.is_empty() {
        return Err(Error::parse(0, "no data rows"));
    }
    let m = rows[0].len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let s = SignalSet::from_row_major(flat.len() / m, m, &flat)?;
    match labels {
        Some(l) if l.len() == m => Ok(s.with_labels(l)?),
        Some(l) => Err(Error::parse(1, format!("header has {} labels for {m} columns", l.len()))),
        None => Ok(s),
    }
}

/// Coordinate list; missing entries are zero and repeated entries add up.
/// The signal count is the largest signal index plus one.
pub fn parse_coo<R: BufRead>(reader: R, n: usize) -> Result<SignalSet> {
    let mut triples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let f = fields(&line);
        if f.len() != 3 {
            return Err(Error::parse(lineno, "expected `node,signal,value`"));
        }
        let (Ok(node), Ok(sig)) = (f[0].parse::<usize>(), f[1].parse::<usize>()) else {
            if triples.is_empty() {
                continue; // header
            }
            return Err(Error::parse(lineno, "bad node or signal index"));
        };
        if node >= n {
            return Err(Error::RowCountMismatch { expected: n, found: node + 1 });
        }
        triples.push((node, sig, check_entry(number(f[2], lineno)?, node, sig)?));
    }
    let m = triples.iter().map(|t| t.1 + 1).max().ok_or_else(|| Error::parse(0, "no entries"))?;
    let mut values = vec![0.0; n * m];
    for (node, sig, v) in triples {
        values[sig * n + node] += v;
    }
    Ok(SignalSet::from_column_major(n, m, values)?)
}

pub fn encode_binary(s: &SignalSet) -> Vec<u8> {
    let mut w = binary::Writer::new(MAGIC, VERSION);
    w.u64(s.nodes() as u64);
    w.u64(s.signals() as u64);
    w.f64s(s.column_major());
    w.finish()
}

pub fn decode_binary(bytes: &[u8], n: Option<usize>) -> Result<SignalSet> {
    let mut r = binary::Reader::open(bytes, MAGIC, VERSION)?;
    let rows = r.usize()?;
    let m = r.usize()?;
    let values = r.f64s(rows.checked_mul(m).ok_or_else(|| Error::ChecksumFailure("size overflow".into()))?)?;
    r.finish()?;
    if let Some(n) = n {
        if rows != n {
            return Err(Error::RowCountMismatch { expected: n, found: rows });
        }
    }
    for (k, &v) in values.iter().enumerate() {
        check_entry(v, k % rows.max(1), k / rows.max(1))?;
    }
    Ok(SignalSet::from_column_major(rows, m, values)?)
}

/// Loads signals in the format implied by the file name.
pub fn load_signals(path: &Path, n: Option<usize>) -> Result<SignalSet> {
    match SignalFormat::from_path(path) {
        SignalFormat::Csv => parse_csv(super::open(path)?, n),
        SignalFormat::Coo => {
            let n = n.ok_or_else(|| Error::Usage("coordinate-list signals need the node count".into()))?;
            parse_coo(super::open(path)?, n)
        }
        SignalFormat::Binary => decode_binary(&super::read_all(path)?, n),
    }
}

pub fn write_csv<W: Write>(s: &SignalSet, mut w: W) -> std::io::Result<()> {
    if let Some(labels) = s.labels() {
        writeln!(w, "{}", labels.join(","))?;
    }
    for row in 0..s.nodes() {
        let line: Vec<String> = (0..s.signals()).map(|c| s.get(row, c).to_string()).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn save_signals(s: &SignalSet, path: &Path) -> Result<()> {
    match SignalFormat::from_path(path) {
        SignalFormat::Binary => {
            let bytes = encode_binary(s);
            super::write_with(path, |w| w.write_all(&bytes))
        }
        SignalFormat::Coo => super::write_with(path, |w| {
            writeln!(w, "node,signal,value")?;
            for c in 0..s.signals() {
                for (r, v) in s.column(c).iter().enumerate().filter(|(_, v)| **v != 0.0) {
                    writeln!(w, "{r},{c},{v}")?;
                }
            }
            Ok(())
        }),
        SignalFormat::Csv => super::write_with(path, |w| write_csv(s, w)),
    }
}
