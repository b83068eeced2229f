use designforge_graph::{ExposureLedger, Graph, LedgerError, Triangle};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::common::{claim_all, remove_triangle, triangle_matching};
use crate::equitable::{equitable_edge_colouring, EquitableError};
use crate::tracker::{DeficiencyTracker, TrackerError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BalanceError {
    #[error("e(G[U_1]), e(G[U_2]), e(G[U_3]) = {counts:?} are not equal and even")]
    UnequalCounts { counts: [usize; 3] },
    #[error("vertex {vertex} has odd degree {degree} inside its part")]
    OddDegree { vertex: usize, degree: usize },
    #[error("the three sets U_i must have equal size, got {sizes:?}")]
    UnequalSizes { sizes: [usize; 3] },
    #[error("max |def(u)| = {max} exceeds the cap {cap} after {budget} splits")]
    DeficiencyCap { max: i64, cap: f64, budget: usize },
    #[error(
        "tracker for U_{part} did not reach 0 within q = {q} classes after {budget} splits: {last}"
    )]
    TrackerStall {
        part: usize,
        q: usize,
        budget: usize,
        last: String,
    },
    #[error("no perfect matching in the auxiliary graph for U_{part}, class pair {pair} after {budget} splits")]
    AuxMatching {
        part: usize,
        pair: usize,
        budget: usize,
    },
    #[error("divisibility fails at vertex {vertex}: {left} ≠ {right}")]
    Divisibility {
        vertex: usize,
        left: usize,
        right: usize,
    },
    #[error(transparent)]
    Colouring(#[from] EquitableError),
    #[error(transparent)]
    Tracker(#[from] TrackerError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceConfig {
    /// The role of ε₂ in `q = ⌊10ε₂|U_i|⌋`.
    pub eps2: f64,
    /// Cap on `|def(u)|`; `None` means `n^{2/3}`.
    pub def_cap: Option<f64>,
    /// Random equal splits tried before giving up.
    pub resplit_budget: usize,
    /// Runs of the auxiliary matchings per split (each with fresh random
    /// matchings).
    pub executions: usize,
    pub stage: String,
}

impl Default for BalanceConfig {
    fn default() -> Self {
        BalanceConfig {
            eps2: 0.02,
            def_cap: None,
            resplit_budget: 20,
            executions: 5,
            stage: "step3".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceReport {
    /// `⌊10ε₂|U_i|⌋`.
    pub q_nominal: usize,
    /// Classes used: at least `Δ + 1` of every `E_{i,s}`.
    pub q: usize,
    pub splits: usize,
    pub max_def: i64,
    /// Class sizes `h_r` per centre part.
    pub class_sizes: [Vec<usize>; 3],
    /// First `r` with `‖w_{i,r}‖ = 0`.
    pub s0: [usize; 3],
}

#[derive(Debug, Clone)]
pub struct Balanced {
    pub triangles: Vec<Triangle>,
    /// `G³`.
    pub graph: Graph,
    pub trackers: [DeficiencyTracker; 3],
    pub report: BalanceReport,
}

/// One random equal split with its colour-class pairs and tracker run.
struct Plan {
    def: [Vec<i64>; 3],
    /// `pairs[i][r] = (M^j_r, N^k_r)` for centre part `i`.
    pairs: [Vec<(Vec<(usize, usize)>, Vec<(usize, usize)>)>; 3],
    q: usize,
}

fn others(i: usize) -> (usize, usize) {
    match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// Covers every edge inside `U_1`, `U_2`, `U_3` by triangles with a centre
/// in another `U_i` so that `G³` satisfies the divisibility condition
/// `d(u, U_j) = d(u, U_k)` for every `u ∈ U_i`.
///
/// Each `E(G[U_i])` is split at random into equal halves `E_{i,j}`, `E_{i,k}`;
/// for centre part `i` the edges `E_{j,i}` and `E_{k,i}` are coloured
/// equitably into `q` matchings, paired by size, and each pair is covered
/// through centres `C_r`, `C'_r` picked by the deficiency tracker and two
/// auxiliary perfect matchings.
pub fn balance_divisibility<R: Rng + ?Sized>(
    g2: &Graph,
    us: [&[usize]; 3],
    ledger: &mut ExposureLedger,
    cfg: &BalanceConfig,
    rng: &mut R,
) -> Result<Balanced, BalanceError> {
    let sizes = us.map(|u| u.len());
    if sizes[0] != sizes[1] || sizes[1] != sizes[2] {
        return Err(BalanceError::UnequalSizes { sizes });
    }
    let counts = us.map(|u| g2.induced_edges(u).len());
    if counts[0] != counts[1] || counts[1] != counts[2] || counts[0] % 2 == 1 {
        return Err(BalanceError::UnequalCounts { counts });
    }
    for u in us {
        let mask = g2.mask(u);
        for &x in u {
            let d = g2.degree_into(x, &mask);
            if d % 2 == 1 {
                return Err(BalanceError::OddDegree {
                    vertex: x,
                    degree: d,
                });
            }
        }
    }
    let n = g2.vertex_count();
    let cap = cfg.def_cap.unwrap_or((n as f64).powf(2.0 / 3.0));
    let q_nominal = (10.0 * cfg.eps2 * sizes[0] as f64 + 1e-9).floor() as usize;
    let mut last: Option<BalanceError> = None;
    for split in 1..=cfg.resplit_budget.max(1) {
        let plan = match plan_split(g2, us, q_nominal, cap, cfg.resplit_budget, rng) {
            Ok(p) => p,
            Err(e) => {
                last = Some(e);
                continue;
            }
        };
        for _ in 0..cfg.executions.max(1) {
            let snapshot = ledger.clone();
            match execute(g2, us, &plan, ledger, cfg, rng) {
                Ok((triangles, graph, trackers)) => {
                    check_divisibility(&graph, us)?;
                    let report = BalanceReport {
                        q_nominal,
                        q: plan.q,
                        splits: split,
                        max_def: plan
                            .def
                            .iter()
                            .flatten()
                            .map(|d| d.abs())
                            .max()
                            .unwrap_or(0),
                        class_sizes: plan
                            .pairs
                            .clone()
                            .map(|ps| ps.iter().map(|p| p.0.len()).collect()),
                        s0: trackers.clone().map(|t| {
                            t.norms
                                .iter()
                                .position(|&x| x == 0)
                                .unwrap_or(t.norms.len())
                        }),
                    };
                    return Ok(Balanced {
                        triangles,
                        graph,
                        trackers,
                        report,
                    });
                }
                Err(e @ BalanceError::AuxMatching { .. }) => {
                    *ledger = snapshot;
                    last = Some(e);
                }
                Err(e) => return Err(e),
            }
        }
    }
    Err(match last.unwrap() {
        BalanceError::AuxMatching { part, pair, .. } => BalanceError::AuxMatching {
            part,
            pair,
            budget: cfg.resplit_budget,
        },
        e => e,
    })
}

/// Draws a split, colours, pairs classes and dry-runs the trackers.
fn plan_split<R: Rng + ?Sized>(
    g2: &Graph,
    us: [&[usize]; 3],
    q_nominal: usize,
    cap: f64,
    budget: usize,
    rng: &mut R,
) -> Result<Plan, BalanceError> {
    let n = g2.vertex_count();
    // halves[i] = (E_{i,j}, E_{i,k}).
    let mut halves: Vec<(Vec<(usize, usize)>, Vec<(usize, usize)>)> = Vec::new();
    let mut def: [Vec<i64>; 3] = Default::default();
    for i in 0..3 {
        let mut es = g2.induced_edges(us[i]);
        es.shuffle(rng);
        let second = es.split_off(es.len() / 2);
        let mut d = vec![0i64; n];
        for &(a, b) in &es {
            d[a] -= 1;
            d[b] -= 1;
        }
        for &(a, b) in &second {
            d[a] += 1;
            d[b] += 1;
        }
        def[i] = us[i].iter().map(|&x| d[x]).collect();
        halves.push((es, second));
    }
    let max = def.iter().flatten().map(|d| d.abs()).max().unwrap_or(0);
    if max as f64 > cap {
        return Err(BalanceError::DeficiencyCap { max, cap, budget });
    }
    // E_{s,i} is the half of E(G[U_s]) sent to centre part i.
    let toward = |s: usize, i: usize| -> &Vec<(usize, usize)> {
        let (j, _) = others(s);
        if i == j {
            &halves[s].0
        } else {
            &halves[s].1
        }
    };
    let graph_of = |es: &[(usize, usize)]| {
        let mut h = Graph::new(n);
        for &(a, b) in es {
            h.add_edge(a, b);
        }
        h
    };
    let mut delta = 0;
    for s in 0..3 {
        for i in 0..3 {
            if i != s {
                delta = delta.max(graph_of(toward(s, i)).max_degree());
            }
        }
    }
    let q = q_nominal.max(delta + 1);
    let mut pairs: [Vec<(Vec<(usize, usize)>, Vec<(usize, usize)>)>; 3] = Default::default();
    for i in 0..3 {
        let (j, k) = others(i);
        let mut cj = equitable_edge_colouring(&graph_of(toward(j, i)), q)?.classes;
        let mut ck = equitable_edge_colouring(&graph_of(toward(k, i)), q)?.classes;
        cj.sort_by_key(Vec::len);
        ck.sort_by_key(Vec::len);
        pairs[i] = cj
            .into_iter()
            .zip(ck)
            .filter(|(m, _)| !m.is_empty())
            .collect();
        let mut t = DeficiencyTracker::new(&def[i])?;
        let mut load = vec![0usize; us[i].len()];
        for (m, _) in &pairs[i] {
            let c = t
                .choose_by(m.len(), |u| load[u])
                .map_err(|e| BalanceError::TrackerStall {
                    part: i + 1,
                    q,
                    budget,
                    last: e.to_string(),
                })?;
            for &u in c.c.iter().chain(&c.c_prime) {
                load[u] += 1;
            }
            t.apply(&c);
        }
        if t.norm() != 0 {
            return Err(BalanceError::TrackerStall {
                part: i + 1,
                q,
                budget,
                last: format!("‖w‖ = {} after {} pairs", t.norm(), pairs[i].len()),
            });
        }
    }
    Ok(Plan { def, pairs, q })
}

#[allow(clippy::type_complexity)]
fn execute<R: Rng + ?Sized>(
    g2: &Graph,
    us: [&[usize]; 3],
    plan: &Plan,
    ledger: &mut ExposureLedger,
    cfg: &BalanceConfig,
    rng: &mut R,
) -> Result<(Vec<Triangle>, Graph, [DeficiencyTracker; 3]), BalanceError> {
    let mut g = g2.clone();
    let mut out = Vec::new();
    let mut trackers: [Option<DeficiencyTracker>; 3] = Default::default();
    for i in 0..3 {
        let u = us[i];
        let mut t = DeficiencyTracker::new(&plan.def[i])?;
        let mut load = vec![0usize; u.len()];
        for (r, (m, nk)) in plan.pairs[i].iter().enumerate() {
            let choice = t.choose_by(m.len(), |x| load[x])?;
            for &x in choice.c.iter().chain(&choice.c_prime) {
                load[x] += 1;
            }
            for (centres, edges) in [(&choice.c, m), (&choice.c_prime, nk)] {
                let ws: Vec<usize> = centres.iter().map(|&x| u[x]).collect();
                let tri = |a: usize, b: usize| {
                    let (x, y) = edges[b];
                    Triangle::in_graph(&g, x, y, ws[a])
                };
                let found = triangle_matching(ws.len(), edges.len(), tri, ledger, rng)?.ok_or(
                    BalanceError::AuxMatching {
                        part: i + 1,
                        pair: r + 1,
                        budget: cfg.resplit_budget,
                    },
                )?;
                for tr in &found {
                    remove_triangle(&mut g, tr);
                }
                claim_all(ledger, &found, &cfg.stage)?;
                out.extend(found);
            }
            t.apply(&choice);
        }
        debug_assert!(t.laws_hold() && t.norm() == 0);
        trackers[i] = Some(t);
    }
    Ok((out, g, trackers.map(Option::unwrap)))
}

/// Exact scan of `d(u, U_j) = d(u, U_k)` over every `u ∈ U_i`, and no edge
/// left inside any `U_i`.
pub fn check_divisibility(g: &Graph, us: [&[usize]; 3]) -> Result<(), BalanceError> {
    let masks = us.map(|u| g.mask(u));
    for i in 0..3 {
        let (j, k) = others(i);
        for &x in us[i] {
            let (left, right) = (g.degree_into(x, &masks[j]), g.degree_into(x, &masks[k]));
            let inner = g.degree_into(x, &masks[i]);
            if left != right || inner != 0 {
                return Err(BalanceError::Divisibility {
                    vertex: x,
                    left,
                    right,
                });
            }
        }
    }
    Ok(())
}
