//! Shared plumbing for the end-to-end builders.

use designforge_graph::{
    named_stream, rng_from_seed, triangle_list_correspondence, ExposureLedger, Graph, Part,
    Triangle,
};
use serde::Serialize;
use thiserror::Error;

use crate::colouring::{solve_list_edge_colouring, Outcome, SolveBudget, SolveStats};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuildError {
    #[error("invalid parameters: {0}")]
    Param(String),
    #[error("stage `{stage}` failed (seed {seed}): {message}")]
    Stage {
        stage: String,
        seed: u64,
        message: String,
    },
    #[error("output failed validation (seed {seed}): {message}")]
    Validation { seed: u64, message: String },
}

impl BuildError {
    pub fn stage(&self) -> Option<&str> {
        match self {
            BuildError::Stage { stage, .. } => Some(stage),
            BuildError::Validation { .. } => Some("validate"),
            BuildError::Param(_) => None,
        }
    }
}

pub(crate) fn stage_err(stage: &str, seed: u64, e: impl ToString) -> BuildError {
    BuildError::Stage {
        stage: stage.into(),
        seed,
        message: e.to_string(),
    }
}

/// Per-stage record of a build.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageRecord {
    pub stage: String,
    pub triangles: usize,
    pub detail: serde_json::Value,
}

/// Rate of each of two independent exposures whose union has rate `p`:
/// `(1 − p₁)(1 − p₂) = 1 − p` with `p₁ = p₂`.
pub fn split_probability(p: f64) -> f64 {
    1.0 - (1.0 - p).sqrt()
}

pub(crate) fn check_p(p: f64) -> Result<(), BuildError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(BuildError::Param(format!("p = {p} outside [0, 1]")))
    }
}

/// Outcome of the list stage: the triangles `x y s` read off the colouring.
pub(crate) struct ListStage {
    pub triangles: Vec<Triangle>,
    pub mean_list_len: f64,
    pub stats: SolveStats,
}

/// Builds the list instance on `V1 ∪ V2 ∪ S`, with `H[V1, V2]` as given by
/// `residual`, exposes `V1 × V2 × S` on a fresh ledger at rate `p`, and
/// colours `H[V1, V2]` with colours `S`.
pub(crate) fn list_stage(
    residual: &Graph,
    v1: &[usize],
    v2: &[usize],
    s: &[usize],
    p: f64,
    seed: u64,
    budget: &SolveBudget,
) -> Result<ListStage, BuildError> {
    let global: Vec<usize> = v1.iter().chain(v2).chain(s).copied().collect();
    let (a, b) = (v1.len(), v2.len());
    let m = global.len();
    let l1: Vec<usize> = (0..a).collect();
    let l2: Vec<usize> = (a..a + b).collect();
    let l3: Vec<usize> = (a + b..m).collect();
    let mut h = Graph::new(m);
    for &x in &l1 {
        for &y in &l2 {
            if residual.has_edge(global[x], global[y]) {
                h.add_edge(x, y);
            }
        }
    }
    let mut lg = h.clone();
    for &x in l1.iter().chain(&l2) {
        for &c in &l3 {
            lg.add_edge(x, c);
        }
    }
    lg.set_parts(vec![
        Part::new("V1", l1.clone()),
        Part::new("V2", l2.clone()),
        Part::new("V3", l3.clone()),
    ])
    .map_err(|e| stage_err("lists", seed, e))?;
    let mut ledger =
        ExposureLedger::new(named_stream(seed, "lists"), p).map_err(|e| stage_err("lists", seed, e))?;
    let universe = l1
        .iter()
        .flat_map(|&x| l2.iter().flat_map(move |&y| (a + b..m).map(move |c| Triangle::new(x, y, c))));
    ledger
        .register_family("V1 x V2 x S", universe)
        .map_err(|e| stage_err("lists", seed, e))?;
    let lists = triangle_list_correspondence(&lg, &mut ledger).map_err(|e| stage_err("lists", seed, e))?;
    let mut rng = rng_from_seed(named_stream(seed, "solve"));
    let res = solve_list_edge_colouring(&h, &lists, budget, &mut rng).map_err(|e| stage_err("solve", seed, e))?;
    let colouring = match &res.outcome {
        Outcome::Success(c) => c,
        Outcome::Exhausted => return Err(stage_err("solve", seed, "budget exhausted")),
        Outcome::Infeasible(cert) => {
            let cert = serde_json::to_string(cert).unwrap_or_default();
            return Err(stage_err("solve", seed, format!("infeasible: {cert}")));
        }
    };
    let local: Vec<Triangle> = res
        .edges
        .iter()
        .zip(colouring)
        .map(|(&(x, y), &c)| Triangle::new(x, y, l3[c]))
        .collect();
    if !ledger.audit(&local).is_clean() {
        return Err(stage_err("solve", seed, "colouring uses a triangle that is not present"));
    }
    let triangles = local
        .iter()
        .map(|t| {
            let [x, y, z] = t.vertices();
            Triangle::new(global[x], global[y], global[z])
        })
        .collect();
    Ok(ListStage {
        triangles,
        mean_list_len: lists.mean_len(),
        stats: res.stats,
    })
}
