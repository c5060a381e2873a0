//! Edge lists: one `src dst [weight]` record per line (tab or space
//! separated), `#` comments, and an optional `%nodes <n>` header.

use std::io::{BufRead, Write};
use std::path::Path;

use udemd_core::{Edge, Graph, LoadReport};

use crate::{Error, Result};

pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<(Graph, LoadReport)> {
    let mut declared = None;
    let mut edges = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("%nodes") {
            let n = rest.trim().parse::<usize>().map_err(|_| Error::parse(lineno, "bad %nodes header"))?;
            declared = Some(n);
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if !(2..=3).contains(&parts.len()) {
            return Err(Error::parse(lineno, format!("expected `src dst [weight]`, got {} fields", parts.len())));
        }
        let node = |s: &str| s.parse::<usize>().map_err(|_| Error::parse(lineno, format!("bad node index {s:?}")));
        let weight = match parts.get(2) {
            Some(w) => w.parse::<f64>().map_err(|_| Error::parse(lineno, format!("bad weight {w:?}")))?,
            None => 1.0,
        };
        edges.push(Edge::new(node(parts[0])?, node(parts[1])?, weight));
    }
    Ok(Graph::from_edges(declared, edges)?)
}

pub fn load_edge_list(path: &Path) -> Result<(Graph, LoadReport)> {
    parse_edge_list(super::open(path)?)
}

pub fn write_edge_list<W: Write>(g: &Graph, mut w: W) -> std::io::Result<()> {
    writeln!(w, "%nodes {}", g.node_count())?;
    for e in g.edges() {
        writeln!(w, "{}\t{}\t{}", e.src, e.dst, e.weight)?;
    }
    Ok(())
}

pub fn save_edge_list(g: &Graph, path: &Path) -> Result<()> {
    super::write_with(path, |w| write_edge_list(g, w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_comments_and_default_weight() {
        let text = "# triangle\n%nodes 3\n0\t1\n1 2 2.5\n\n2\t0\t1\n";
        let (g, _) = parse_edge_list(text.as_bytes()).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.weight(1, 2), 2.5);
    }

    #[test]
    fn inferred_size() {
        let (g, _) = parse_edge_list("0 1\n1 4\n4 2\n2 3\n".as_bytes()).unwrap();
        assert_eq!(g.node_count(), 5);
    }

    #[test]
    fn declared_isolated_node_is_disconnected() {
        let err = parse_edge_list("%nodes 3\n0 1 1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Core(udemd_core::Error::DisconnectedGraph { .. })));
    }

    #[test]
    fn malformed_line() {
        assert!(matches!(parse_edge_list("0 1 x\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_edge_list("0\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn round_trip() {
        let (g, _) = parse_edge_list("0 1 0.5\n1 2 0.25\n2 0 3\n".as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        assert_eq!(parse_edge_list(buf.as_slice()).unwrap().0, g);
    }
}
