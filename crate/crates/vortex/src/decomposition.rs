use designforge_graph::BipartiteGraph;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VortexError {
    #[error("n = {0} is too small (need n ≥ 4)")]
    TooSmall(usize),
    #[error("spread constant must be positive, got {0}")]
    BadConstant(f64),
    #[error("level count must be at least 1")]
    NoLevels,
    #[error("label vector has {labels} entries for {edges} edges")]
    LabelCount { labels: usize, edges: usize },
    #[error("label {label} outside [1, {max}]")]
    LabelRange { label: u32, max: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VortexParams {
    pub ell: u32,
    /// `2^{−ℓ}`.
    pub p: f64,
    /// Set when even `ℓ = 1` misses the threshold `C ln n / n`.
    pub degenerate: bool,
}

/// Largest `ℓ ≥ 1` with `2^{−ℓ} ≥ C ln n / n`.
pub fn vortex_params(n: usize, c: f64) -> Result<VortexParams, VortexError> {
    if n < 4 {
        return Err(VortexError::TooSmall(n));
    }
    if c.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(VortexError::BadConstant(c));
    }
    let threshold = c * (n as f64).ln() / n as f64;
    let fits = |ell: u32| 0.5f64.powi(ell as i32) >= threshold * (1.0 - 1e-12);
    if !fits(1) {
        return Ok(VortexParams {
            ell: 1,
            p: 0.5,
            degenerate: true,
        });
    }
    let mut ell = 1;
    while ell < 62 && fits(ell + 1) {
        ell += 1;
    }
    Ok(VortexParams {
        ell,
        p: 0.5f64.powi(ell as i32),
        degenerate: false,
    })
}

/// Edge labels `X_{e,0} ∈ [2^ℓ − 1]` over the sorted edge list of a host;
/// part `H_{i,j}` holds the edges labeled `2^{ℓ−i} + j − 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexDecomposition {
    pub ell: u32,
    pub n_left: usize,
    pub n_right: usize,
    pub edges: Vec<(usize, usize)>,
    pub labels: Vec<u32>,
}

/// Compact serialized form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VortexRecord {
    pub ell: u32,
    pub labels: Vec<u32>,
}

#[inline]
pub fn label_of(ell: u32, i: u32, j: u32) -> u32 {
    (1u32 << (ell - i)) + j - 1
}

/// Inverse of [`label_of`]: `(i, j)` for a label in `[1, 2^ℓ − 1]`.
#[inline]
pub fn index_of(ell: u32, label: u32) -> (u32, u32) {
    let top = 31 - label.leading_zeros();
    let i = ell - top;
    let j = label - (1u32 << top) + 1;
    (i, j)
}

/// Number of slots at level `i`: `2^{ℓ−i}`.
#[inline]
pub fn slots(ell: u32, i: u32) -> u32 {
    1u32 << (ell - i)
}

/// All `(i, j)` in canonical order.
pub fn indices(ell: u32) -> Vec<(u32, u32)> {
    (1..=ell)
        .flat_map(|i| (1..=slots(ell, i)).map(move |j| (i, j)))
        .collect()
}

impl VortexDecomposition {
    pub fn from_labels(g: &BipartiteGraph, ell: u32, labels: Vec<u32>) -> Result<Self, VortexError> {
        if ell == 0 {
            return Err(VortexError::NoLevels);
        }
        let edges = g.edges();
        if labels.len() != edges.len() {
            return Err(VortexError::LabelCount {
                labels: labels.len(),
                edges: edges.len(),
            });
        }
        let max = (1u32 << ell) - 1;
        if let Some(&label) = labels.iter().find(|&&l| l == 0 || l > max) {
            return Err(VortexError::LabelRange { label, max });
        }
        Ok(VortexDecomposition {
            ell,
            n_left: g.left_count(),
            n_right: g.right_count(),
            edges,
            labels,
        })
    }

    /// Label probability `1/(2^ℓ − 1)` under uniform labeling.
    pub fn p(&self) -> f64 {
        1.0 / ((1u64 << self.ell) - 1) as f64
    }

    pub fn part_count(&self) -> usize {
        (1usize << self.ell) - 1
    }

    pub fn index_of_edge(&self, k: usize) -> (u32, u32) {
        index_of(self.ell, self.labels[k])
    }

    pub fn part(&self, i: u32, j: u32) -> BipartiteGraph {
        let want = label_of(self.ell, i, j);
        let mut h = BipartiteGraph::new(self.n_left, self.n_right);
        for (&(a, b), &l) in self.edges.iter().zip(&self.labels) {
            if l == want {
                h.add_edge(a, b);
            }
        }
        h
    }

    /// All parts indexed by label − 1.
    pub fn parts_by_label(&self) -> Vec<BipartiteGraph> {
        let mut parts = vec![BipartiteGraph::new(self.n_left, self.n_right); self.part_count()];
        for (&(a, b), &l) in self.edges.iter().zip(&self.labels) {
            parts[(l - 1) as usize].add_edge(a, b);
        }
        parts
    }

    pub fn record(&self) -> VortexRecord {
        VortexRecord {
            ell: self.ell,
            labels: self.labels.clone(),
        }
    }
}

/// Uniform labels `X_{e,0}` on `[2^ℓ − 1]`, independently per edge.
pub fn random_vortex<R: Rng + ?Sized>(
    g: &BipartiteGraph,
    ell: u32,
    rng: &mut R,
) -> Result<VortexDecomposition, VortexError> {
    if ell == 0 {
        return Err(VortexError::NoLevels);
    }
    let max = (1u32 << ell) - 1;
    let labels = (0..g.edge_count()).map(|_| rng.gen_range(1..=max)).collect();
    VortexDecomposition::from_labels(g, ell, labels)
}
