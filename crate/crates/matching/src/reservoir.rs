use std::collections::HashSet;

use designforge_graph::BipartiteGraph;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::factorize::greedy_disjoint_matchings;
use crate::hopcroft_karp::{perfect_matching, MatchingError};

/// One bipartite instance `(V_i, V_i', G_i)`. `left` and `right` hold global
/// vertex ids; `edges` are local `(a, b)` pairs of the exposed graph `G_i`.
#[derive(Debug, Clone)]
pub struct ReservoirInstance {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

impl ReservoirInstance {
    fn global(&self, a: usize, b: usize) -> (usize, usize) {
        let (u, v) = (self.left[a], self.right[b]);
        (u.min(v), u.max(v))
    }
}

#[derive(Debug, Clone)]
pub struct ReservoirConfig {
    /// Scale `n` used by the overlap conditions.
    pub n: usize,
    pub rho: f64,
    /// Matchings found per instance before the uniform pick; `None` uses
    /// [`default_ell`].
    pub ell: Option<usize>,
    /// Fail when some vertex keeps fewer than this fraction of `|V_i|`
    /// neighbours after earlier instances took their edges.
    pub min_degree_fraction: Option<f64>,
    /// Per-instance indices excused from the overlap condition.
    pub exempt: Vec<Vec<usize>>,
}

impl ReservoirConfig {
    pub fn new(n: usize, rho: f64) -> Self {
        ReservoirConfig {
            n,
            rho,
            ell: None,
            min_degree_fraction: None,
            exempt: Vec::new(),
        }
    }
}

/// `max(3, ⌈ρ^{3/2}·degree/20⌉)`.
pub fn default_ell(rho: f64, available_degree: usize) -> usize {
    let x = (rho.powf(1.5) * available_degree as f64 / 20.0).ceil() as usize;
    x.max(3)
}

/// Diagnostic status of the lemma hypotheses; reported, never enforced.
#[derive(Debug, Clone, Serialize, Default)]
pub struct ReservoirConditions {
    /// Instances with `|V_i| < ρ^{4/3} n`.
    pub small_instances: Vec<usize>,
    /// Instances with more than `ρ³ n` non-exempt heavy overlaps.
    pub overlap_failures: Vec<usize>,
    /// Largest number of `V_i` (resp. `V_i'`) containing one vertex.
    pub max_left_multiplicity: usize,
    pub max_right_multiplicity: usize,
    pub multiplicity_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReservoirOutcome {
    /// Matching `i` as global `(left, right)` pairs.
    pub matchings: Vec<Vec<(usize, usize)>>,
    /// How many disjoint candidates each pick was made from.
    pub candidates: Vec<usize>,
    pub conditions: ReservoirConditions,
}

#[derive(Debug, Error, Clone, PartialEq, Serialize)]
pub enum ReservoirError {
    #[error("instance {instance}: sides have sizes {left} and {right}")]
    Unbalanced {
        instance: usize,
        left: usize,
        right: usize,
    },
    #[error("instance {instance}: minimum degree {min_degree} fell below {floor}")]
    DegreeCollapse {
        instance: usize,
        min_degree: usize,
        floor: usize,
    },
    #[error("instance {instance}: no perfect matching")]
    NoMatching {
        instance: usize,
        cause: MatchingError,
    },
}

fn check_conditions(instances: &[ReservoirInstance], cfg: &ReservoirConfig) -> ReservoirConditions {
    let n = cfg.n as f64;
    let rho = cfg.rho;
    let mut c = ReservoirConditions {
        multiplicity_bound: 2.0 * rho * n,
        ..Default::default()
    };
    let max_id = instances
        .iter()
        .flat_map(|i| i.left.iter().chain(&i.right))
        .copied()
        .max()
        .map_or(0, |x| x + 1);
    let mut ml = vec![0usize; max_id];
    let mut mr = vec![0usize; max_id];
    let sets_l: Vec<HashSet<usize>> = instances.iter().map(|i| i.left.iter().copied().collect()).collect();
    let sets_r: Vec<HashSet<usize>> = instances.iter().map(|i| i.right.iter().copied().collect()).collect();
    for (i, inst) in instances.iter().enumerate() {
        if (inst.left.len() as f64) < rho.powf(4.0 / 3.0) * n {
            c.small_instances.push(i);
        }
        for &v in &inst.left {
            ml[v] += 1;
        }
        for &v in &inst.right {
            mr[v] += 1;
        }
        let exempt = cfg.exempt.get(i);
        let heavy = (0..instances.len())
            .filter(|&j| j != i && !exempt.is_some_and(|e| e.contains(&j)))
            .filter(|&j| {
                let ol = sets_l[i].intersection(&sets_l[j]).count() as f64;
                let or = sets_r[i].intersection(&sets_r[j]).count() as f64;
                ol > rho * rho * n || or > rho * rho * n
            })
            .count();
        if heavy as f64 > rho.powi(3) * n {
            c.overlap_failures.push(i);
        }
    }
    c.max_left_multiplicity = ml.into_iter().max().unwrap_or(0);
    c.max_right_multiplicity = mr.into_iter().max().unwrap_or(0);
    c
}

/// Edge-disjoint perfect matchings `M_1, …, M_m`, one per instance, chosen
/// sequentially: for instance `i`, find up to `ℓ` disjoint perfect matchings
/// of `G_i` minus the edges already used and keep one uniformly at random.
/// Inherently sequential across `i` because of the shared used-edge set.
pub fn reservoir_matchings<R: Rng + ?Sized>(
    instances: &[ReservoirInstance],
    cfg: &ReservoirConfig,
    rng: &mut R,
) -> Result<ReservoirOutcome, ReservoirError> {
    for (i, inst) in instances.iter().enumerate() {
        if inst.left.len() != inst.right.len() {
            return Err(ReservoirError::Unbalanced {
                instance: i,
                left: inst.left.len(),
                right: inst.right.len(),
            });
        }
    }
    let conditions = check_conditions(instances, cfg);
    let mut used: HashSet<(usize, usize)> = HashSet::new();
    let mut matchings = Vec::with_capacity(instances.len());
    let mut candidates = Vec::with_capacity(instances.len());
    for (i, inst) in instances.iter().enumerate() {
        let k = inst.left.len();
        let mut g = BipartiteGraph::new(k, k);
        for &(a, b) in &inst.edges {
            if !used.contains(&inst.global(a, b)) {
                g.add_edge(a, b);
            }
        }
        if let Some(frac) = cfg.min_degree_fraction {
            let floor = (frac * k as f64).floor() as usize;
            if k > 0 && g.min_degree() < floor {
                return Err(ReservoirError::DegreeCollapse {
                    instance: i,
                    min_degree: g.min_degree(),
                    floor,
                });
            }
        }
        let ell = cfg.ell.unwrap_or_else(|| default_ell(cfg.rho, g.min_degree()));
        let found = greedy_disjoint_matchings(&g, ell.max(1), rng);
        if found.is_empty() {
            let cause = perfect_matching(&g).expect_err("greedy search found no matching");
            return Err(ReservoirError::NoMatching { instance: i, cause });
        }
        let pick = rng.gen_range(0..found.len());
        candidates.push(found.len());
        let chosen: Vec<(usize, usize)> = found[pick]
            .iter()
            .map(|&(a, b)| {
                used.insert(inst.global(a, b));
                (inst.left[a], inst.right[b])
            })
            .collect();
        matchings.push(chosen);
    }
    Ok(ReservoirOutcome {
        matchings,
        candidates,
        conditions,
    })
}
