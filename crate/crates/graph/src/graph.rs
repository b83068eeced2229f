use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("loop at vertex {0}")]
    Loop(usize),
    #[error("parts do not partition the vertex set (vertex {0})")]
    BadPartition(usize),
    #[error("n = {n} violates divisibility: n mod 6 = {rem}, need 1 or 3")]
    Divisibility { n: usize, rem: usize },
    #[error("epsilon {0} outside (0, 1)")]
    Epsilon(f64),
    #[error("graph is not {0}-regular")]
    NotRegular(usize),
    #[error("invalid size: {0}")]
    Size(String),
    #[error("graph has the wrong shape: {0}")]
    Shape(String),
}

/// A labeled vertex subset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Part {
    pub label: String,
    pub vertices: Vec<usize>,
}

impl Part {
    pub fn new(label: impl Into<String>, vertices: Vec<usize>) -> Self {
        Part {
            label: label.into(),
            vertices,
        }
    }
}

/// Simple undirected graph with adjacency lists and a row bitset.
///
/// `parts` partition the vertex set when present. `marked` holds named
/// subsets that need not partition anything (for example `W3 ⊆ V3`).
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
    adj: Vec<Vec<usize>>,
    m: usize,
    parts: Vec<Part>,
    marked: Vec<Part>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.bits == other.bits
    }
}

impl Graph {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Graph {
            n,
            words,
            bits: vec![0; n * words],
            adj: vec![Vec::new(); n],
            m: 0,
            parts: Vec::new(),
            marked: Vec::new(),
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v);
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Graph::new(n);
        for &(u, v) in edges {
            g.try_add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.bits[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    pub fn try_add_edge(&mut self, u: usize, v: usize) -> Result<bool, GraphError> {
        if u >= self.n {
            return Err(GraphError::VertexOutOfRange(u));
        }
        if v >= self.n {
            return Err(GraphError::VertexOutOfRange(v));
        }
        if u == v {
            return Err(GraphError::Loop(u));
        }
        Ok(self.add_edge(u, v))
    }

    /// Adds `uv`; returns false if it was already present.
    pub fn add_edge(&mut self, u: usize, v: usize) -> bool {
        assert!(u != v && u < self.n && v < self.n, "bad edge {u}-{v}");
        if self.has_edge(u, v) {
            return false;
        }
        self.bits[u * self.words + v / 64] |= 1 << (v % 64);
        self.bits[v * self.words + u / 64] |= 1 << (u % 64);
        self.adj[u].push(v);
        self.adj[v].push(u);
        self.m += 1;
        true
    }

    /// Removes `uv`; returns false if it was absent.
    pub fn remove_edge(&mut self, u: usize, v: usize) -> bool {
        if !self.has_edge(u, v) {
            return false;
        }
        self.bits[u * self.words + v / 64] &= !(1 << (v % 64));
        self.bits[v * self.words + u / 64] &= !(1 << (u % 64));
        let i = self.adj[u].iter().position(|&x| x == v).unwrap();
        self.adj[u].swap_remove(i);
        let j = self.adj[v].iter().position(|&x| x == u).unwrap();
        self.adj[v].swap_remove(j);
        self.m -= 1;
        true
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// All edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.m);
        for u in 0..self.n {
            for &v in &self.adj[u] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// `|N(u) ∩ N(v)|` via the row bitsets.
    pub fn codegree(&self, u: usize, v: usize) -> usize {
        let a = &self.bits[u * self.words..(u + 1) * self.words];
        let b = &self.bits[v * self.words..(v + 1) * self.words];
        a.iter().zip(b).map(|(x, y)| (x & y).count_ones() as usize).sum()
    }

    /// Number of neighbours of `u` inside `set`.
    pub fn degree_into(&self, u: usize, set: &[bool]) -> usize {
        self.adj[u].iter().filter(|&&v| set[v]).count()
    }

    /// `e(X, Y)` counting ordered pairs `(x, y)` with `x ∈ X`, `y ∈ Y`.
    /// Edges inside `X ∩ Y` are counted twice.
    pub fn e_between(&self, xs: &[usize], ys: &[usize]) -> usize {
        let mask = self.mask(ys);
        xs.iter().map(|&x| self.degree_into(x, &mask)).sum()
    }

    /// Indicator vector of a vertex subset.
    pub fn mask(&self, vs: &[usize]) -> Vec<bool> {
        let mut m = vec![false; self.n];
        for &v in vs {
            m[v] = true;
        }
        m
    }

    /// Edges with both ends in `set`, sorted.
    pub fn induced_edges(&self, set: &[usize]) -> Vec<(usize, usize)> {
        let mask = self.mask(set);
        let mut out = Vec::new();
        for &u in set {
            for &v in &self.adj[u] {
                if u < v && mask[v] {
                    out.push((u, v));
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn is_regular(&self) -> Option<usize> {
        let d = self.adj.first().map_or(0, Vec::len);
        self.adj.iter().all(|a| a.len() == d).then_some(d)
    }

    /// Installs a labeled partition of the vertex set.
    pub fn set_parts(&mut self, parts: Vec<Part>) -> Result<(), GraphError> {
        let mut seen = vec![false; self.n];
        for p in &parts {
            for &v in &p.vertices {
                if v >= self.n {
                    return Err(GraphError::VertexOutOfRange(v));
                }
                if seen[v] {
                    return Err(GraphError::BadPartition(v));
                }
                seen[v] = true;
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(GraphError::BadPartition(v));
        }
        self.parts = parts;
        Ok(())
    }

    pub fn add_marked(&mut self, set: Part) -> Result<(), GraphError> {
        if let Some(&v) = set.vertices.iter().find(|&&v| v >= self.n) {
            return Err(GraphError::VertexOutOfRange(v));
        }
        self.marked.push(set);
        Ok(())
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn marked(&self) -> &[Part] {
        &self.marked
    }

    /// Looks up a part or marked subset by label.
    pub fn part(&self, label: &str) -> Option<&[usize]> {
        self.parts
            .iter()
            .chain(&self.marked)
            .find(|p| p.label == label)
            .map(|p| p.vertices.as_slice())
    }

    /// Index of the part containing each vertex (`usize::MAX` when unpartitioned).
    pub fn part_index(&self) -> Vec<usize> {
        let mut idx = vec![usize::MAX; self.n];
        for (i, p) in self.parts.iter().enumerate() {
            for &v in &p.vertices {
                idx[v] = i;
            }
        }
        idx
    }

    /// Spanning copy with the same parts and no edges.
    pub fn empty_like(&self) -> Graph {
        let mut g = Graph::new(self.n);
        g.parts = self.parts.clone();
        g.marked = self.marked.clone();
        g
    }

    /// Invariant check used by tests: degree equals adjacency length and
    /// adjacency agrees with the bitset.
    pub fn check_consistency(&self) -> bool {
        let mut count = 0;
        for u in 0..self.n {
            let row: usize = self.bits[u * self.words..(u + 1) * self.words]
                .iter()
                .map(|w| w.count_ones() as usize)
                .sum();
            if row != self.adj[u].len() || self.has_edge(u, u) {
                return false;
            }
            for &v in &self.adj[u] {
                if !self.has_edge(v, u) {
                    return false;
                }
            }
            count += row;
        }
        count == 2 * self.m
    }
}
