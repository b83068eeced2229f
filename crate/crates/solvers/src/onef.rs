use std::collections::HashSet;

use designforge_graph::validate_proper_edge_colouring;
use designforge_reductions::{one_f_reduce, Red2Config};
use serde::Serialize;
use serde_json::json;

use crate::build::{check_p, list_stage, split_probability, stage_err, BuildError, StageRecord};
use crate::colouring::SolveBudget;

#[derive(Debug, Clone, PartialEq)]
pub struct OneFConfig {
    pub eps: f64,
    pub p: f64,
    pub c: f64,
    pub seed: u64,
    /// Remaining reduction settings; `eps`, `p`, `c` and `seed` above win.
    pub red2: Red2Config,
    pub budget: SolveBudget,
}

impl Default for OneFConfig {
    fn default() -> Self {
        OneFConfig {
            eps: 0.12,
            p: 1.0,
            c: 12.0,
            seed: 0,
            red2: Red2Config::default(),
            budget: SolveBudget::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneFBuild {
    pub n: usize,
    pub seed: u64,
    /// Edges of `K_{2n}` in sorted order.
    pub edges: Vec<(usize, usize)>,
    /// `colours[i] ∈ [0, 2n − 1)` is the colour of `edges[i]`.
    pub colours: Vec<usize>,
    pub stages: Vec<StageRecord>,
}

impl OneFBuild {
    /// Colour classes, each a perfect matching of `K_{2n}`.
    pub fn classes(&self) -> Vec<Vec<(usize, usize)>> {
        let mut out = vec![Vec::new(); 2 * self.n - 1];
        for (&e, &c) in self.edges.iter().zip(&self.colours) {
            out[c].push(e);
        }
        out
    }
}

/// Proper `(2n − 1)`-edge-colouring of `K_{2n}` from random lists.
///
/// Works on the join graph with `V1 ∪ V2` the vertices of `K_{2n}` and
/// `C1 ∪ C2` the colours, where a triangle `x y c` means edge `xy` gets
/// colour `c`. `one_f_reduce` runs on the first exposure, the residual
/// `H[V1, V2]` is list coloured with colours `C2 ∖ C2'` from the second,
/// and the union of triangles is read back as an edge colouring.
pub fn build_one_factorization_k2n(n: usize, cfg: &OneFConfig) -> Result<OneFBuild, BuildError> {
    check_p(cfg.p)?;
    if n < 2 {
        return Err(BuildError::Param(format!("n = {n} too small")));
    }
    let seed = cfg.seed;
    let q = split_probability(cfg.p);
    let red = Red2Config {
        eps: cfg.eps,
        p: q,
        c: cfg.c,
        seed,
        ..cfg.red2.clone()
    };
    let out = one_f_reduce(n, &red).map_err(|e| stage_err("reduce", seed, e))?;
    let part = |l: &str| out.part(l).map(<[usize]>::to_vec).ok_or_else(|| stage_err("reduce", seed, format!("missing part {l}")));
    let (v1, v2, c2, c2p) = (part("V1")?, part("V2")?, part("C2")?, part("C2'")?);
    let colours: Vec<usize> = c2.iter().copied().filter(|x| !c2p.contains(x)).collect();
    for &x in v1.iter().chain(&v2) {
        if let Some(&c) = colours.iter().find(|&&c| !out.residual.has_edge(x, c)) {
            return Err(stage_err("lists", seed, format!("residual lacks edge {x}-{c}")));
        }
    }
    let ls = list_stage(&out.residual, &v1, &v2, &colours, q, seed, &cfg.budget)?;

    let m = 2 * n;
    let mut coloured: Vec<((usize, usize), usize)> = Vec::with_capacity(n * (m - 1));
    for t in out.triangles.iter().chain(&ls.triangles) {
        let [a, b, c] = t.vertices();
        if b >= m || c < m {
            return Err(stage_err("assemble", seed, format!("triangle {a} {b} {c} is not edge + colour")));
        }
        coloured.push(((a, b), c - m));
    }
    coloured.sort_unstable();
    let edges: Vec<(usize, usize)> = coloured.iter().map(|x| x.0).collect();
    let colours_out: Vec<usize> = coloured.iter().map(|x| x.1).collect();
    let distinct: HashSet<&(usize, usize)> = edges.iter().collect();
    if distinct.len() != edges.len() || edges.len() != n * (m - 1) {
        return Err(BuildError::Validation {
            seed,
            message: format!("{} coloured edges, {} distinct, K_{m} has {}", edges.len(), distinct.len(), n * (m - 1)),
        });
    }
    let report = validate_proper_edge_colouring(&edges, &colours_out, m - 1, None);
    if !report.valid {
        return Err(BuildError::Validation {
            seed,
            message: format!("{} violations, first {:?}", report.violations.len(), report.violations.first()),
        });
    }

    let mut stages: Vec<StageRecord> = out
        .stats
        .iter()
        .map(|s| StageRecord {
            stage: format!("reduce/{}", s.stage),
            triangles: s.triangles,
            detail: s.detail.clone(),
        })
        .collect();
    stages.push(StageRecord {
        stage: "lists".into(),
        triangles: ls.triangles.len(),
        detail: json!({
            "p_reduce": q,
            "p_lists": q,
            "colours": colours.len(),
            "mean_list_len": ls.mean_list_len,
            "solve": ls.stats,
        }),
    });
    Ok(OneFBuild {
        n,
        seed,
        edges,
        colours: colours_out,
        stages,
    })
}
