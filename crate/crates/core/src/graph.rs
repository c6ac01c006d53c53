//! Simple undirected graphs and the DIMACS-like edge-list format.
//!
//! Files use a `p edge <n> <m>` header followed by `e <u> <v>` lines with
//! 1-indexed vertices; `c` lines are comments. In memory vertices are 0-indexed.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a simple graph; edges are normalized to `(min, max)` and kept in
    /// input order. Self-loops, duplicates and out-of-range endpoints are
    /// rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut list = Vec::new();
        let mut adjacency = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::input(format!(
                    "edge ({}, {}) out of range for {} vertices",
                    u + 1,
                    v + 1,
                    n
                )));
            }
            if u == v {
                return Err(Error::input(format!("self-loop on vertex {}", u + 1)));
            }
            let e = (u.min(v), u.max(v));
            if !seen.insert(e) {
                return Err(Error::input(format!(
                    "duplicate edge ({}, {})",
                    e.0 + 1,
                    e.1 + 1
                )));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
            list.push(e);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        Ok(Graph {
            n,
            edges: list,
            adjacency,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Average degree `2m / n`.
    pub fn average_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            2.0 * self.m() as f64 / self.n as f64
        }
    }

    /// Number of edges with endpoints on different sides of `sides`.
    pub fn cut_value(&self, sides: &[u8]) -> usize {
        self.edges
            .iter()
            .filter(|&&(u, v)| sides[u] != sides[v])
            .count()
    }

    /// Number of edges with both endpoints selected.
    pub fn induced_edges(&self, selected: &[u8]) -> usize {
        self.edges
            .iter()
            .filter(|&&(u, v)| selected[u] == 1 && selected[v] == 1)
            .count()
    }

    pub fn parse_dimacs(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize, usize)> = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("p") => {
                    if header.is_some() {
                        return Err(Error::parse(line_no, "duplicate header"));
                    }
                    let kind = parts.next();
                    if kind != Some("edge") && kind != Some("col") {
                        return Err(Error::parse(line_no, "expected `p edge <n> <m>`"));
                    }
                    let n = parse_count(parts.next(), line_no, "vertex count")?;
                    let m = parse_count(parts.next(), line_no, "edge count")?;
                    header = Some((n, m, line_no));
                }
                Some("e") => {
                    let (n, _, _) =
                        header.ok_or_else(|| Error::parse(line_no, "edge before header"))?;
                    let u = parse_count(parts.next(), line_no, "endpoint")?;
                    let v = parse_count(parts.next(), line_no, "endpoint")?;
                    if u == 0 || v == 0 || u > n || v > n {
                        return Err(Error::parse(
                            line_no,
                            format!("vertex out of range 1..={n}"),
                        ));
                    }
                    if u == v {
                        return Err(Error::parse(line_no, format!("self-loop on vertex {u}")));
                    }
                    edges.push((u - 1, v - 1, line_no));
                }
                Some(other) => {
                    return Err(Error::parse(line_no, format!("unknown line type `{other}`")))
                }
                None => {}
            }
        }
        let (n, m, header_line) = header.ok_or_else(|| Error::parse(1, "missing header"))?;
        if edges.len() != m {
            return Err(Error::parse(
                header_line,
                format!("header declares {m} edges, found {}", edges.len()),
            ));
        }
        let mut seen = BTreeSet::new();
        for &(u, v, line_no) in &edges {
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::parse(line_no, "duplicate edge"));
            }
        }
        Graph::new(n, edges.into_iter().map(|(u, v, _)| (u, v)))
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "p edge {} {}", self.n, self.m());
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "e {} {}", u + 1, v + 1);
        }
        out
    }
}

fn parse_count(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?
        .parse::<usize>()
        .map_err(|_| Error::parse(line, format!("invalid {what}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_triangle() {
        let g = Graph::parse_dimacs("c tri\np edge 3 3\ne 1 2\ne 2 3\ne 1 3\n").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.m(), 3);
        assert_eq!(g.neighbors(0), &[1, 2]);
        assert_eq!(g.cut_value(&[1, 0, 0]), 2);
    }

    #[test]
    fn rejects_self_loops_and_duplicates() {
        assert!(matches!(
            Graph::parse_dimacs("p edge 2 1\ne 1 1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            Graph::parse_dimacs("p edge 2 2\ne 1 2\ne 2 1\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(Graph::new(2, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(2, [(0, 2)]).is_err());
    }

    #[test]
    fn rejects_count_mismatch() {
        assert!(Graph::parse_dimacs("p edge 3 2\ne 1 2\n").is_err());
    }

    #[test]
    fn dimacs_roundtrip() {
        let g = Graph::new(4, [(0, 1), (2, 3), (1, 3)]).unwrap();
        assert_eq!(Graph::parse_dimacs(&g.to_dimacs()).unwrap(), g);
    }
}
