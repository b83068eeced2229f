//! Text edge lists and JSON forms of designs.
//!
//! Edge-list format: a header `graph <kind> <n> <key=value>…` followed by one
//! `u v` pair per line, 0-indexed. The header always carries
//! `vertices=<count>` so graphs whose size differs from `n` round-trip.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::triangle::Triangle;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone)]
pub struct EdgeListFile {
    pub kind: String,
    pub n: usize,
    pub params: Vec<(String, String)>,
    pub graph: Graph,
}

pub fn write_edge_list<W: Write>(
    mut w: W,
    kind: &str,
    n: usize,
    params: &[(String, String)],
    g: &Graph,
) -> Result<(), IoError> {
    write!(w, "graph {kind} {n}")?;
    for (k, v) in params.iter().filter(|(k, _)| k != "vertices") {
        write!(w, " {k}={v}")?;
    }
    writeln!(w, " vertices={}", g.vertex_count())?;
    for (u, v) in g.edges() {
        writeln!(w, "{u} {v}")?;
    }
    Ok(())
}

pub fn read_edge_list<R: BufRead>(r: R) -> Result<EdgeListFile, IoError> {
    let mut lines = r.lines().enumerate();
    let (_, header) = lines.next().ok_or(IoError::Parse {
        line: 1,
        msg: "empty input".into(),
    })?;
    let header = header?;
    let mut tok = header.split_whitespace();
    if tok.next() != Some("graph") {
        return Err(IoError::Parse {
            line: 1,
            msg: "header must start with `graph`".into(),
        });
    }
    let kind = tok
        .next()
        .ok_or(IoError::Parse { line: 1, msg: "missing kind".into() })?
        .to_string();
    let n: usize = tok
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or(IoError::Parse { line: 1, msg: "missing n".into() })?;
    let mut params = Vec::new();
    for t in tok {
        let (k, v) = t.split_once('=').ok_or(IoError::Parse {
            line: 1,
            msg: format!("bad parameter `{t}`"),
        })?;
        params.push((k.to_string(), v.to_string()));
    }
    let mut edges = Vec::new();
    for (i, line) in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace().map(str::parse::<usize>);
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(u)), Some(Ok(v)), None) => edges.push((u, v)),
            _ => {
                return Err(IoError::Parse {
                    line: i + 1,
                    msg: format!("expected `u v`, got `{line}`"),
                })
            }
        }
    }
    let declared = params
        .iter()
        .find(|(k, _)| k == "vertices")
        .and_then(|(_, v)| v.parse::<usize>().ok());
    let count = declared.unwrap_or_else(|| {
        edges
            .iter()
            .map(|&(u, v)| u.max(v) + 1)
            .max()
            .unwrap_or(n)
            .max(n)
    });
    let graph = Graph::from_edges(count, &edges).map_err(|e| IoError::Parse {
        line: 0,
        msg: e.to_string(),
    })?;
    params.retain(|(k, _)| k != "vertices");
    Ok(EdgeListFile {
        kind,
        n,
        params,
        graph,
    })
}

/// One-factorization as an array of edge arrays.
pub fn one_factorization_json(matchings: &[Vec<(usize, usize)>]) -> Result<String, IoError> {
    let v: Vec<Vec<[usize; 2]>> = matchings
        .iter()
        .map(|m| m.iter().map(|&(a, b)| [a, b]).collect())
        .collect();
    Ok(serde_json::to_string(&v)?)
}

/// Triple system as an array of sorted triples.
pub fn sts_json(triples: &[Triangle]) -> Result<String, IoError> {
    let v: Vec<[usize; 3]> = triples.iter().map(Triangle::vertices).collect();
    Ok(serde_json::to_string(&v)?)
}

/// Latin square as a row-major matrix.
pub fn latin_json(square: &[Vec<usize>]) -> Result<String, IoError> {
    Ok(serde_json::to_string(square)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchingRecord {
    pub edges: Vec<[usize; 2]>,
}
