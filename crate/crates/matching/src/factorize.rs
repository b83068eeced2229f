use designforge_graph::{BipartiteGraph, Matching, OneFactorization};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::hopcroft_karp::{perfect_matching, MatchingError};

#[derive(Debug, Error, Clone, PartialEq, Serialize)]
pub enum FactorizeError {
    #[error("graph is not regular")]
    NotRegular,
    #[error("parts have different sizes ({left} vs {right})")]
    UnequalParts { left: usize, right: usize },
}

/// `d` edge-disjoint perfect matchings of a `d`-regular bipartite graph,
/// peeled one at a time. Removing a perfect matching keeps the graph
/// regular, so every round succeeds.
pub fn one_factorize<R: Rng + ?Sized>(
    g: &BipartiteGraph,
    rng: &mut R,
) -> Result<OneFactorization, FactorizeError> {
    if g.left_count() != g.right_count() {
        return Err(FactorizeError::UnequalParts {
            left: g.left_count(),
            right: g.right_count(),
        });
    }
    let d = g.is_regular().ok_or(FactorizeError::NotRegular)?;
    let mut rest = g.clone();
    rest.shuffle_adjacency(rng);
    let mut out = Vec::with_capacity(d);
    for _ in 0..d {
        let m = perfect_matching(&rest).expect("regular bipartite graphs have perfect matchings");
        for &(a, b) in &m {
            rest.remove_edge(a, b);
        }
        out.push(m);
    }
    Ok(out)
}

#[derive(Debug, Error, Clone, PartialEq, Serialize)]
pub enum ManyMatchingsError {
    #[error("minimum degree {min_degree} below the required {required}")]
    MinDegree { min_degree: usize, required: usize },
    #[error("no perfect matching at iteration {iteration}")]
    Failed {
        iteration: usize,
        found: usize,
        cause: MatchingError,
    },
}

/// Up to `count` edge-disjoint perfect matchings inside the exposed edges
/// of `h`, found greedily by repeated perfect matching with removal.
///
/// `min_degree_eps`, when set, requires `δ(h) ≥ (1 − ε)·|side|` before any
/// exposure is consulted. Iterations are 1-based in errors.
pub fn many_disjoint_matchings<R: Rng + ?Sized>(
    h: &BipartiteGraph,
    mut exposed: impl FnMut(usize, usize) -> bool,
    count: usize,
    min_degree_eps: Option<f64>,
    rng: &mut R,
) -> Result<Vec<Matching>, ManyMatchingsError> {
    if let Some(eps) = min_degree_eps {
        let required = ((1.0 - eps) * h.left_count() as f64).ceil().max(0.0) as usize;
        let min_degree = h.min_degree();
        if min_degree < required {
            return Err(ManyMatchingsError::MinDegree {
                min_degree,
                required,
            });
        }
    }
    let mut g = BipartiteGraph::new(h.left_count(), h.right_count());
    for (a, b) in h.edges() {
        if exposed(a, b) {
            g.add_edge(a, b);
        }
    }
    g.shuffle_adjacency(rng);
    let mut out = Vec::with_capacity(count);
    for it in 0..count {
        match perfect_matching(&g) {
            Ok(m) => {
                for &(a, b) in &m {
                    g.remove_edge(a, b);
                }
                out.push(m);
            }
            Err(cause) => {
                return Err(ManyMatchingsError::Failed {
                    iteration: it + 1,
                    found: out.len(),
                    cause,
                })
            }
        }
    }
    Ok(out)
}

/// Like [`many_disjoint_matchings`] but returns whatever was found before
/// the first failure instead of an error.
pub fn greedy_disjoint_matchings<R: Rng + ?Sized>(
    h: &BipartiteGraph,
    count: usize,
    rng: &mut R,
) -> Vec<Matching> {
    let mut g = h.clone();
    g.shuffle_adjacency(rng);
    let mut out = Vec::new();
    while out.len() < count {
        match perfect_matching(&g) {
            Ok(m) => {
                for &(a, b) in &m {
                    g.remove_edge(a, b);
                }
                out.push(m);
            }
            Err(_) => break,
        }
    }
    out
}
