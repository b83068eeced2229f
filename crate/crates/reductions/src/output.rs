use designforge_graph::{Graph, Part, Triangle};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error("n = {n} has n mod 6 = {rem}, need 1 or 3")]
    Divisibility { n: usize, rem: usize },
    #[error("parameter out of range: {0}")]
    Param(String),
    #[error("stage `{stage}` failed (seed {seed}): {message}")]
    Stage {
        stage: String,
        seed: u64,
        message: String,
    },
    #[error("output check failed (seed {seed}): {message}")]
    Validation { seed: u64, message: String },
}

/// Per-stage record: triangle count plus a stage-specific report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageStats {
    pub stage: String,
    pub triangles: usize,
    pub detail: serde_json::Value,
}

/// Edge-disjoint exposed triangles `T` and the residual `H` with
/// `E(base) = E(H) ⊔ ⋃ E(T)`.
#[derive(Debug, Clone)]
pub struct ReductionOutput {
    pub seed: u64,
    pub triangles: Vec<Triangle>,
    pub residual: Graph,
    /// Parts of the base graph followed by its marked subsets.
    pub parts: Vec<Part>,
    pub stats: Vec<StageStats>,
}

#[derive(Serialize)]
struct Json<'a> {
    seed: u64,
    triangles: Vec<[usize; 3]>,
    residual_edges: Vec<(usize, usize)>,
    parts: &'a [Part],
    stats: &'a [StageStats],
}

impl ReductionOutput {
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string(&Json {
            seed: self.seed,
            triangles: self.triangles.iter().map(|t| t.vertices()).collect(),
            residual_edges: self.residual.edges(),
            parts: &self.parts,
            stats: &self.stats,
        })
    }

    /// One JSON object per stage, newline separated.
    pub fn trace_jsonl(&self) -> serde_json::Result<String> {
        let mut out = String::new();
        for s in &self.stats {
            out.push_str(&serde_json::to_string(s)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn part(&self, label: &str) -> Option<&[usize]> {
        self.parts
            .iter()
            .find(|p| p.label == label)
            .map(|p| p.vertices.as_slice())
    }
}
