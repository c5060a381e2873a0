//! Distance matrices as CSV: a header row of labels (first cell empty), then
//! one row per signal starting with its label.

use std::io::{BufRead, Write};
use std::path::Path;

use udemd_core::DistanceMatrix;

use super::{fields, number};
use crate::{Error, Result};

fn labels(dm: &DistanceMatrix) -> Vec<String> {
    match dm.labels() {
        Some(l) => l.to_vec(),
        None => (0..dm.len()).map(|i| format!("s{i}")).collect(),
    }
}

pub fn write_csv<W: Write>(dm: &DistanceMatrix, mut w: W) -> std::io::Result<()> {
    let l = labels(dm);
    writeln!(w, ",{}", l.join(","))?;
    for (i, name) in l.iter().enumerate() {
        let row: Vec<String> = dm.row(i).iter().map(|v| v.to_string()).collect();
        writeln!(w, "{name},{}", row.join(","))?;
    }
    Ok(())
}

pub fn parse_csv<R: BufRead>(reader: R, metric_name: &str) -> Result<DistanceMatrix> {
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, l)) => l.map_err(|e| Error::parse(1, e.to_string()))?,
        None => return Err(Error::parse(0, "empty distance matrix")),
    };
    let names: Vec<String> = fields(&header).iter().skip(1).map(|s| s.to_string()).collect();
    let m = names.len();
    let mut values = Vec::with_capacity(m * m);
    let mut rows = 0;
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let f = fields(&line);
        if f.len() != m + 1 {
            return Err(Error::parse(lineno, format!("expected {} fields, found {}", m + 1, f.len())));
        }
        for s in &f[1..] {
            values.push(number(s, lineno)?);
        }
        rows += 1;
    }
    if rows != m {
        return Err(Error::RowCountMismatch { expected: m, found: rows });
    }
    let dm = DistanceMatrix::new(m, values, metric_name)?.with_labels(Some(names))?;
    dm.validate(1e-9)?;
    Ok(dm)
}

pub fn save_distances(dm: &DistanceMatrix, path: &Path) -> Result<()> {
    super::write_with(path, |w| write_csv(dm, w))
}

pub fn load_distances(path: &Path) -> Result<DistanceMatrix> {
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("distances").to_string();
    parse_csv(super::open(path)?, &name)
}
