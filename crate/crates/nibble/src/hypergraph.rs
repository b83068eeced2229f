use std::collections::HashSet;

use designforge_graph::{Graph, Triangle};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HypergraphError {
    #[error("edge {0:?} repeats a vertex or leaves the vertex range")]
    BadEdge([usize; 3]),
    #[error("edges {0} and {1} share two vertices")]
    NotLinear(usize, usize),
}

/// 3-uniform hypergraph in which two edges share at most one vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearTripleHypergraph {
    n: usize,
    edges: Vec<[usize; 3]>,
    incidence: Vec<Vec<usize>>,
}

impl LinearTripleHypergraph {
    pub fn new(n: usize, edges: Vec<[usize; 3]>) -> Result<Self, HypergraphError> {
        let mut pairs: std::collections::HashMap<(usize, usize), usize> = Default::default();
        let mut incidence = vec![Vec::new(); n];
        for (k, e) in edges.iter().enumerate() {
            let mut s = *e;
            s.sort_unstable();
            if s[0] == s[1] || s[1] == s[2] || s[2] >= n {
                return Err(HypergraphError::BadEdge(*e));
            }
            for (a, b) in [(s[0], s[1]), (s[0], s[2]), (s[1], s[2])] {
                if let Some(&other) = pairs.get(&(a, b)) {
                    return Err(HypergraphError::NotLinear(other, k));
                }
                pairs.insert((a, b), k);
            }
            for &v in e {
                incidence[v].push(k);
            }
        }
        Ok(LinearTripleHypergraph { n, edges, incidence })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, k: usize) -> [usize; 3] {
        self.edges[k]
    }

    pub fn edges(&self) -> &[[usize; 3]] {
        &self.edges
    }

    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incidence[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incidence[v].len()
    }

    /// True if no two listed edges share a vertex.
    pub fn is_matching(&self, ks: &[usize]) -> bool {
        let mut seen = HashSet::new();
        ks.iter().all(|&k| self.edges[k].iter().all(|&v| seen.insert(v)))
    }
}

/// Auxiliary hypergraph of a graph: vertices are the edges of `g`
/// (indexed as in `g.edges()`), hyperedges are the given triangles.
/// Two triangles of a simple graph share at most one edge, so the result
/// is linear.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleHypergraph {
    pub hypergraph: LinearTripleHypergraph,
    pub graph_edges: Vec<(usize, usize)>,
    pub triangles: Vec<Triangle>,
}

impl TriangleHypergraph {
    pub fn new(g: &Graph, triangles: Vec<Triangle>) -> Self {
        let graph_edges = g.edges();
        let index = |u: usize, v: usize| {
            graph_edges
                .binary_search(&(u.min(v), u.max(v)))
                .expect("triangle edge present in graph")
        };
        let edges = triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.vertices();
                [index(a, b), index(a, c), index(b, c)]
            })
            .collect();
        let hypergraph = LinearTripleHypergraph::new(graph_edges.len(), edges)
            .expect("distinct triangles of a simple graph share at most one edge");
        TriangleHypergraph {
            hypergraph,
            graph_edges,
            triangles,
        }
    }

    /// Edge-star `E_v` as hypergraph vertices.
    pub fn star(&self, v: usize) -> Vec<usize> {
        self.graph_edges
            .iter()
            .enumerate()
            .filter(|(_, &(a, b))| a == v || b == v)
            .map(|(k, _)| k)
            .collect()
    }
}
