//! Exhaustive checkers for the defining properties of each design.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::bipartite::BipartiteGraph;
use crate::graph::Graph;
use crate::lists::ListAssignment;
use crate::triangle::Triangle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DesignKind {
    OneFactorization,
    TriangleDecomposition,
    Sts,
    LatinSquare,
    ProperEdgeColouring,
}

pub enum Design<'a> {
    /// Ordered perfect matchings of a bipartite host, edges as `(left, right)`.
    OneFactorization {
        host: &'a BipartiteGraph,
        matchings: &'a [Vec<(usize, usize)>],
    },
    TriangleDecomposition {
        host: &'a Graph,
        triangles: &'a [Triangle],
    },
    Sts {
        n: usize,
        triples: &'a [[usize; 3]],
    },
    LatinSquare {
        square: &'a [Vec<usize>],
    },
    /// `colours[i]` is the colour of `edges[i]`.
    ProperEdgeColouring {
        edges: &'a [(usize, usize)],
        colours: &'a [usize],
        n_colours: usize,
        lists: Option<&'a ListAssignment>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    EdgeNotInHost { edge: (usize, usize) },
    EdgeRepeated { edge: (usize, usize), first: usize, second: usize },
    EdgeUncovered { edge: (usize, usize) },
    VertexCoveredTwice { class: usize, vertex: usize },
    VertexMissed { class: usize, vertex: usize },
    WrongClassCount { expected: usize, found: usize },
    TripleInvalid { triple: [usize; 3] },
    PairCoverage { pair: (usize, usize), count: usize },
    TripleCount { expected: usize, found: usize },
    NotSquare { row: usize, len: usize },
    SymbolOutOfRange { row: usize, col: usize, symbol: usize },
    RowRepeat { row: usize, symbol: usize },
    ColumnRepeat { col: usize, symbol: usize },
    ColourOutOfRange { edge: (usize, usize), colour: usize },
    ColourClash { vertex: usize, colour: usize },
    ColourNotInList { edge: (usize, usize), colour: usize },
    LengthMismatch { edges: usize, colours: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EdgeNotInHost { edge } => write!(f, "edge {edge:?} is not in the host"),
            Violation::EdgeRepeated { edge, first, second } => {
                write!(f, "edge {edge:?} used by classes {first} and {second}")
            }
            Violation::EdgeUncovered { edge } => write!(f, "edge {edge:?} not covered"),
            Violation::VertexCoveredTwice { class, vertex } => {
                write!(f, "class {class} covers vertex {vertex} twice")
            }
            Violation::VertexMissed { class, vertex } => {
                write!(f, "class {class} misses vertex {vertex}")
            }
            Violation::WrongClassCount { expected, found } => {
                write!(f, "expected {expected} classes, found {found}")
            }
            Violation::TripleInvalid { triple } => write!(f, "invalid triple {triple:?}"),
            Violation::PairCoverage { pair, count } => {
                write!(f, "pair {pair:?} covered {count} times")
            }
            Violation::TripleCount { expected, found } => {
                write!(f, "expected {expected} triples, found {found}")
            }
            Violation::NotSquare { row, len } => write!(f, "row {row} has length {len}"),
            Violation::SymbolOutOfRange { row, col, symbol } => {
                write!(f, "symbol {symbol} at ({row},{col}) out of range")
            }
            Violation::RowRepeat { row, symbol } => write!(f, "row {row} repeats {symbol}"),
            Violation::ColumnRepeat { col, symbol } => write!(f, "column {col} repeats {symbol}"),
            Violation::ColourOutOfRange { edge, colour } => {
                write!(f, "edge {edge:?} has colour {colour} out of range")
            }
            Violation::ColourClash { vertex, colour } => {
                write!(f, "vertex {vertex} sees colour {colour} twice")
            }
            Violation::ColourNotInList { edge, colour } => {
                write!(f, "colour {colour} not in the list of {edge:?}")
            }
            Violation::LengthMismatch { edges, colours } => {
                write!(f, "{edges} edges but {colours} colours")
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub kind: DesignKind,
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn from(kind: DesignKind, violations: Vec<Violation>) -> Self {
        ValidationReport {
            kind,
            valid: violations.is_empty(),
            violations,
        }
    }
}

pub fn validate_design(design: &Design<'_>) -> ValidationReport {
    match design {
        Design::OneFactorization { host, matchings } => validate_one_factorization(host, matchings),
        Design::TriangleDecomposition { host, triangles } => {
            validate_triangle_decomposition(host, triangles)
        }
        Design::Sts { n, triples } => validate_sts(*n, triples),
        Design::LatinSquare { square } => validate_latin_square(square),
        Design::ProperEdgeColouring {
            edges,
            colours,
            n_colours,
            lists,
        } => validate_proper_edge_colouring(edges, colours, *n_colours, *lists),
    }
}

pub fn validate_one_factorization(
    host: &BipartiteGraph,
    matchings: &[Vec<(usize, usize)>],
) -> ValidationReport {
    let mut v = Vec::new();
    let (nl, nr) = (host.left_count(), host.right_count());
    let d = host.is_regular();
    if let Some(d) = d {
        if matchings.len() != d {
            v.push(Violation::WrongClassCount {
                expected: d,
                found: matchings.len(),
            });
        }
    }
    let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
    for (k, m) in matchings.iter().enumerate() {
        let mut seen_l = vec![false; nl];
        let mut seen_r = vec![false; nr];
        for &(a, b) in m {
            if !host.has_edge(a, b) {
                v.push(Violation::EdgeNotInHost { edge: (a, b) });
                continue;
            }
            if let Some(&first) = owner.get(&(a, b)) {
                v.push(Violation::EdgeRepeated {
                    edge: (a, b),
                    first,
                    second: k,
                });
            } else {
                owner.insert((a, b), k);
            }
            if std::mem::replace(&mut seen_l[a], true) {
                v.push(Violation::VertexCoveredTwice { class: k, vertex: a });
            }
            if std::mem::replace(&mut seen_r[b], true) {
                v.push(Violation::VertexCoveredTwice {
                    class: k,
                    vertex: nl + b,
                });
            }
        }
        for (a, s) in seen_l.iter().enumerate() {
            if !s {
                v.push(Violation::VertexMissed { class: k, vertex: a });
            }
        }
        for (b, s) in seen_r.iter().enumerate() {
            if !s {
                v.push(Violation::VertexMissed {
                    class: k,
                    vertex: nl + b,
                });
            }
        }
    }
    for e in host.edges() {
        if !owner.contains_key(&e) {
            v.push(Violation::EdgeUncovered { edge: e });
        }
    }
    ValidationReport::from(DesignKind::OneFactorization, v)
}

pub fn validate_triangle_decomposition(host: &Graph, triangles: &[Triangle]) -> ValidationReport {
    let mut v = Vec::new();
    let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
    for (k, t) in triangles.iter().enumerate() {
        for e in t.edges() {
            if !host.has_edge(e.0, e.1) {
                v.push(Violation::EdgeNotInHost { edge: e });
            } else if let Some(&first) = owner.get(&e) {
                v.push(Violation::EdgeRepeated {
                    edge: e,
                    first,
                    second: k,
                });
            } else {
                owner.insert(e, k);
            }
        }
    }
    for e in host.edges() {
        if !owner.contains_key(&e) {
            v.push(Violation::EdgeUncovered { edge: e });
        }
    }
    ValidationReport::from(DesignKind::TriangleDecomposition, v)
}

pub fn validate_sts(n: usize, triples: &[[usize; 3]]) -> ValidationReport {
    let mut v = Vec::new();
    let mut count = vec![0usize; n * n];
    for tr in triples {
        let [a, b, c] = *tr;
        if a >= n || b >= n || c >= n || a == b || b == c || a == c {
            v.push(Violation::TripleInvalid { triple: *tr });
            continue;
        }
        for (x, y) in [(a, b), (a, c), (b, c)] {
            count[x.min(y) * n + x.max(y)] += 1;
        }
    }
    for x in 0..n {
        for y in x + 1..n {
            let c = count[x * n + y];
            if c != 1 {
                v.push(Violation::PairCoverage { pair: (x, y), count: c });
            }
        }
    }
    let expected = n * n.saturating_sub(1) / 6;
    if triples.len() != expected {
        v.push(Violation::TripleCount {
            expected,
            found: triples.len(),
        });
    }
    ValidationReport::from(DesignKind::Sts, v)
}

pub fn validate_latin_square(square: &[Vec<usize>]) -> ValidationReport {
    let n = square.len();
    let mut v = Vec::new();
    for (r, row) in square.iter().enumerate() {
        if row.len() != n {
            v.push(Violation::NotSquare { row: r, len: row.len() });
        }
    }
    if !v.is_empty() {
        return ValidationReport::from(DesignKind::LatinSquare, v);
    }
    let mut col_seen = vec![vec![false; n]; n];
    for (r, row) in square.iter().enumerate() {
        let mut row_seen = vec![false; n];
        for (c, &s) in row.iter().enumerate() {
            if s >= n {
                v.push(Violation::SymbolOutOfRange { row: r, col: c, symbol: s });
                continue;
            }
            if std::mem::replace(&mut row_seen[s], true) {
                v.push(Violation::RowRepeat { row: r, symbol: s });
            }
            if std::mem::replace(&mut col_seen[c][s], true) {
                v.push(Violation::ColumnRepeat { col: c, symbol: s });
            }
        }
    }
    ValidationReport::from(DesignKind::LatinSquare, v)
}

pub fn validate_proper_edge_colouring(
    edges: &[(usize, usize)],
    colours: &[usize],
    n_colours: usize,
    lists: Option<&ListAssignment>,
) -> ValidationReport {
    let mut v = Vec::new();
    if edges.len() != colours.len() {
        v.push(Violation::LengthMismatch {
            edges: edges.len(),
            colours: colours.len(),
        });
        return ValidationReport::from(DesignKind::ProperEdgeColouring, v);
    }
    let mut seen: HashMap<(usize, usize), ()> = HashMap::new();
    for (&(a, b), &c) in edges.iter().zip(colours) {
        if c >= n_colours {
            v.push(Violation::ColourOutOfRange { edge: (a, b), colour: c });
            continue;
        }
        for x in [a, b] {
            if seen.insert((x, c), ()).is_some() {
                v.push(Violation::ColourClash { vertex: x, colour: c });
            }
        }
        if let Some(l) = lists {
            let ok = l.list(a, b).is_some_and(|l| l.binary_search(&c).is_ok());
            if !ok {
                v.push(Violation::ColourNotInList { edge: (a, b), colour: c });
            }
        }
    }
    ValidationReport::from(DesignKind::ProperEdgeColouring, v)
}
