use designforge_graph::{
    enumerate_triangles, Exposure, ExposureLedger, Graph, LedgerError, Triangle,
};
use designforge_matching::{
    reservoir_matchings, ReservoirConfig, ReservoirError, ReservoirInstance,
};
use designforge_nibble::{almost_triangle_decomposition, AlmostConfig, AlmostError, NibbleConfig};
use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::common::{claim_all, present, remove_triangle, small_perfect_matching};
use crate::packing::improve_packing;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoverDownError {
    #[error("vertex {vertex} outside U has odd degree {degree}")]
    Parity { vertex: usize, degree: usize },
    #[error("vertex {0} of U is not a vertex of the host")]
    BadU(usize),
    #[error("no reservoir vertex left for edge {edge:?} after {restarts} restarts")]
    PsiExhausted {
        edge: (usize, usize),
        restarts: usize,
    },
    #[error("reservoir matching failed: {0}")]
    Reservoir(ReservoirError),
    #[error(transparent)]
    Almost(#[from] AlmostError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error("no finishing matching for apex {apex} on {size} reservoir vertices")]
    Finishing { apex: usize, size: usize },
    #[error("vertex {vertex} outside U keeps degree {degree}")]
    Residue { vertex: usize, degree: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverDownConfig {
    /// Probability that `v ∈ N(w) ∩ U` joins the reservoir `U_w` (the role of ε₂).
    pub reservoir_rate: f64,
    /// Leftover fraction for the almost decomposition of `G'` (the role of ε₁).
    pub gamma: f64,
    pub nibble: NibbleConfig,
    /// Adjust reservoirs so every degree of `G'` is even.
    pub even_reservoirs: bool,
    /// Hill-climbing steps applied to the almost decomposition (0 = off).
    pub packing_steps: usize,
    /// Second-phase hill-climbing cost of an uncovered edge outside `U`
    /// (crossing edges cost 1).
    pub inner_weight: u32,
    /// Metropolis temperature for uphill hill-climbing moves.
    pub packing_temp: f64,
    /// Random orders tried by the greedy map ψ.
    pub psi_restarts: usize,
    /// Backtracking nodes allowed when choosing the split `V_w = V_w' ⊔ V_w''`.
    pub split_budget: usize,
    /// Passes over the apexes before the finishing step gives up.
    pub finishing_restarts: usize,
    /// Whole-attempt retries with fresh reservoirs.
    pub retries: usize,
    pub stage: String,
}

impl Default for CoverDownConfig {
    fn default() -> Self {
        CoverDownConfig {
            reservoir_rate: 0.02,
            gamma: 0.02,
            nibble: NibbleConfig::default(),
            even_reservoirs: true,
            packing_steps: 20_000,
            inner_weight: 3,
            packing_temp: 0.5,
            psi_restarts: 200,
            split_budget: 2_000,
            finishing_restarts: 200,
            retries: 30,
            stage: "cover_down".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverDownReport {
    pub attempts: usize,
    pub u_size: usize,
    pub mean_reservoir: f64,
    /// Triangles the nibble placed in `G'`.
    pub nibble_triangles: usize,
    /// Triangles in `G'` after hill-climbing.
    pub almost_triangles: usize,
    /// Edges of `G''` outside `U`, each covered through ψ.
    pub psi_edges: usize,
    /// Triangles with two vertices in `U`.
    pub finishing_triangles: usize,
    /// `min_{v ∈ U} d_{G*}(v)`.
    pub min_u_degree: usize,
    /// `|U| − 2ε₂·|V(G)|`.
    pub u_degree_bound: f64,
    /// Whether `min_u_degree ≥ u_degree_bound`.
    pub u_degree_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverDown {
    pub triangles: Vec<Triangle>,
    /// `G*`: what is left, all inside `U`.
    pub remainder: Graph,
    pub report: CoverDownReport,
}

/// Covers every edge of `gp` not inside `U` by edge-disjoint exposed
/// triangles. Vertices of `gp` are its non-isolated vertices plus `U`.
///
/// Reservoirs `U_w` are set aside, `G' = G − R − E(G[U])` is almost
/// decomposed, the leftover edges outside `U` are sent through ψ into
/// reservoir triangles, and what remains at each `w ∉ U` is finished by
/// edge-disjoint perfect matchings inside `U`. Failed attempts restore the
/// ledger and retry.
pub fn cover_down_part<R: Rng + ?Sized>(
    gp: &Graph,
    u: &[usize],
    ledger: &mut ExposureLedger,
    cfg: &CoverDownConfig,
    rng: &mut R,
) -> Result<CoverDown, CoverDownError> {
    let n = gp.vertex_count();
    if let Some(&bad) = u.iter().find(|&&x| x >= n) {
        return Err(CoverDownError::BadU(bad));
    }
    let in_u = gp.mask(u);
    let outside: Vec<usize> = (0..n).filter(|&v| !in_u[v] && gp.degree(v) > 0).collect();
    if let Some(&v) = outside.iter().find(|&&v| gp.degree(v) % 2 == 1) {
        return Err(CoverDownError::Parity {
            vertex: v,
            degree: gp.degree(v),
        });
    }
    let size = outside.len() + u.len();
    let bound = u.len() as f64 - 2.0 * cfg.reservoir_rate * size as f64;
    let mut report = CoverDownReport {
        attempts: 0,
        u_size: u.len(),
        mean_reservoir: 0.0,
        nibble_triangles: 0,
        almost_triangles: 0,
        psi_edges: 0,
        finishing_triangles: 0,
        min_u_degree: u.iter().map(|&x| gp.degree(x)).min().unwrap_or(0),
        u_degree_bound: bound,
        u_degree_ok: true,
    };
    if outside.is_empty() {
        return Ok(CoverDown {
            triangles: Vec::new(),
            remainder: gp.clone(),
            report,
        });
    }
    let mut last = None;
    for attempt in 0..=cfg.retries {
        report.attempts = attempt + 1;
        let snapshot = ledger.clone();
        match attempt_once(gp, u, &in_u, &outside, ledger, cfg, rng, &mut report) {
            Ok(out) => return Ok(out),
            Err(e @ (CoverDownError::Ledger(_) | CoverDownError::Residue { .. })) => return Err(e),
            Err(e) => {
                *ledger = snapshot;
                last = Some(e);
            }
        }
    }
    Err(last.unwrap())
}

#[allow(clippy::too_many_arguments)]
fn attempt_once<R: Rng + ?Sized>(
    gp: &Graph,
    u: &[usize],
    in_u: &[bool],
    outside: &[usize],
    ledger: &mut ExposureLedger,
    cfg: &CoverDownConfig,
    rng: &mut R,
    report: &mut CoverDownReport,
) -> Result<CoverDown, CoverDownError> {
    let n = gp.vertex_count();
    // Reservoirs U_w and the edge set R.
    let mut chosen: HashSet<(usize, usize)> = HashSet::new();
    for &w in outside {
        for &v in gp.neighbors(w) {
            if in_u[v] && rng.gen_bool(cfg.reservoir_rate) {
                chosen.insert((w, v));
            }
        }
    }
    if cfg.even_reservoirs {
        even_up(gp, u, outside, &mut chosen, rng);
    }
    let mut reservoir: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(w, v) in &chosen {
        reservoir[w].push(v);
    }
    let mut in_res = vec![Vec::new(); n];
    for &w in outside {
        reservoir[w].sort_unstable();
        in_res[w] = gp.mask(&reservoir[w]);
    }
    report.mean_reservoir =
        outside.iter().map(|&w| reservoir[w].len()).sum::<usize>() as f64 / outside.len() as f64;

    let mut g1 = gp.clone();
    for &w in outside {
        for &v in &reservoir[w] {
            g1.remove_edge(w, v);
        }
    }
    for (a, b) in gp.induced_edges(u) {
        g1.remove_edge(a, b);
    }
    // S³ ∪ S²_nres: every triangle of G'.
    let candidates = enumerate_triangles(&g1, None);
    let acfg = AlmostConfig {
        gamma: cfg.gamma,
        nibble: cfg.nibble.clone(),
        stage: cfg.stage.clone(),
        ..AlmostConfig::default()
    };
    let almost = almost_triangle_decomposition(&g1, ledger, &candidates, &acfg, rng)?;
    report.nibble_triangles = almost.triangles.len();
    let packed = if cfg.packing_steps > 0 {
        let live: Vec<Triangle> = candidates
            .iter()
            .filter(|t| ledger.state(t) == Some(Exposure::Present))
            .copied()
            .collect();
        for t in &almost.triangles {
            ledger.unclaim(t);
        }
        // Uncovered edges outside U need ψ; crossing ones only cost a
        // finishing triangle.
        let weight = |a: usize, b: usize| {
            if in_u[a] || in_u[b] {
                1
            } else {
                cfg.inner_weight
            }
        };
        let better = improve_packing(
            &g1,
            &live,
            &almost.triangles,
            weight,
            cfg.packing_temp,
            cfg.packing_steps,
            rng,
        );
        claim_all(ledger, &better, &cfg.stage)?;
        better
    } else {
        almost.triangles
    };
    report.almost_triangles = packed.len();
    let mut g2 = g1.clone();
    for t in &packed {
        remove_triangle(&mut g2, t);
    }

    // ψ on E(G''[V ∖ U]): each edge vw gets an apex in U_v ∩ U_w, with
    // every reservoir edge used at most once.
    let inner: Vec<(usize, usize)> = g2
        .edges()
        .into_iter()
        .filter(|&(a, b)| !in_u[a] && !in_u[b])
        .collect();
    report.psi_edges = inner.len();
    let mut options: Vec<Vec<usize>> = Vec::with_capacity(inner.len());
    for &(a, b) in &inner {
        let mut opts = Vec::new();
        for &x in &reservoir[a] {
            if in_res[b][x] && present(ledger, &Triangle::new(a, b, x))? {
                opts.push(x);
            }
        }
        options.push(opts);
    }
    let psi = assign_psi(&inner, &options, cfg.psi_restarts, rng)?;
    let psi_tris: Vec<Triangle> = inner
        .iter()
        .zip(&psi)
        .map(|(&(a, b), &x)| Triangle::new(a, b, x))
        .collect();

    // G_rem: G'' plus R minus the ψ triangles; only U-crossing edges remain.
    let mut rem = g2.clone();
    for &w in outside {
        for &v in &reservoir[w] {
            rem.add_edge(w, v);
        }
    }
    for t in &psi_tris {
        remove_triangle(&mut rem, t);
    }
    let mut order: Vec<usize> = outside
        .iter()
        .copied()
        .filter(|&w| rem.degree(w) > 0)
        .collect();
    order.sort_by_key(|&w| std::cmp::Reverse(rem.degree(w)));
    // Pairs x, y ∈ N_rem(w) whose triangle with w is usable at all.
    let mut sides: Vec<Vec<usize>> = Vec::with_capacity(order.len());
    let mut live: HashSet<(usize, usize, usize)> = HashSet::new();
    for &w in &order {
        let side: Vec<usize> = rem.neighbors(w).to_vec();
        debug_assert!(side.iter().all(|&x| in_u[x]) && side.len() % 2 == 0);
        for (i, &x) in side.iter().enumerate() {
            for &y in &side[i + 1..] {
                if gp.has_edge(x, y) && present(ledger, &Triangle::new(x, y, w))? {
                    live.insert((w, x.min(y), x.max(y)));
                }
            }
        }
        sides.push(side);
    }
    let fin_tris = finish(&order, &sides, &live, report, outside.len(), cfg, rng)?;
    report.finishing_triangles = fin_tris.len();

    claim_all(ledger, &psi_tris, &cfg.stage)?;
    claim_all(ledger, &fin_tris, &cfg.stage)?;
    let mut triangles = packed;
    triangles.extend(psi_tris);
    triangles.extend(fin_tris);
    let mut remainder = gp.clone();
    for t in &triangles {
        remove_triangle(&mut remainder, t);
    }
    if let Some(&v) = outside.iter().find(|&&v| remainder.degree(v) > 0) {
        return Err(CoverDownError::Residue {
            vertex: v,
            degree: remainder.degree(v),
        });
    }
    report.min_u_degree = u.iter().map(|&x| remainder.degree(x)).min().unwrap_or(0);
    report.u_degree_ok = report.min_u_degree as f64 >= report.u_degree_bound;
    Ok(CoverDown {
        triangles,
        remainder,
        report: report.clone(),
    })
}

/// One perfect matching per apex `w` on its remaining U-neighbours, all
/// U-edges distinct. The first pass runs the reservoir matching step apex by
/// apex; later passes shuffle the apex order and draw each matching by
/// randomized backtracking.
fn finish<R: Rng + ?Sized>(
    order: &[usize],
    sides: &[Vec<usize>],
    live: &HashSet<(usize, usize, usize)>,
    report: &CoverDownReport,
    outside: usize,
    cfg: &CoverDownConfig,
    rng: &mut R,
) -> Result<Vec<Triangle>, CoverDownError> {
    let mut worst = None;
    for pass in 0..cfg.finishing_restarts.max(1) {
        let mut idx: Vec<usize> = (0..order.len()).collect();
        if pass > 0 {
            idx.shuffle(rng);
        }
        let mut used: HashSet<(usize, usize)> = HashSet::new();
        let mut out = Vec::new();
        let mut failed = None;
        for &i in &idx {
            let (w, side) = (order[i], &sides[i]);
            let adj = |x: usize, y: usize| {
                let key = (x.min(y), x.max(y));
                live.contains(&(w, key.0, key.1)) && !used.contains(&key)
            };
            let Some(seed) = small_perfect_matching(side, &adj, cfg.split_budget, rng) else {
                failed = Some((w, side.len()));
                break;
            };
            let m = if pass == 0 {
                // Any split works; take one that some perfect matching respects.
                let (left, right): (Vec<usize>, Vec<usize>) = seed.into_iter().unzip();
                let mut edges = Vec::new();
                for (a, &x) in left.iter().enumerate() {
                    for (b, &y) in right.iter().enumerate() {
                        if adj(x, y) {
                            edges.push((a, b));
                        }
                    }
                }
                let inst = ReservoirInstance { left, right, edges };
                let rcfg = ReservoirConfig::new(report.u_size + outside, cfg.reservoir_rate);
                let r =
                    reservoir_matchings(&[inst], &rcfg, rng).map_err(CoverDownError::Reservoir)?;
                r.matchings.into_iter().next().unwrap()
            } else {
                seed
            };
            for (x, y) in m {
                used.insert((x.min(y), x.max(y)));
                out.push(Triangle::new(x, y, w));
            }
        }
        match failed {
            None => return Ok(out),
            Some(f) => worst = Some(f),
        }
    }
    let (apex, size) = worst.unwrap();
    Err(CoverDownError::Finishing { apex, size })
}

/// Toggles reservoir edges so that every vertex has even degree in
/// `G' = G − R − E(G[U])`: pairs of parity-odd vertices are joined by a
/// toggled crossing edge, or by two through a common neighbour.
fn even_up<R: Rng + ?Sized>(
    gp: &Graph,
    u: &[usize],
    outside: &[usize],
    chosen: &mut HashSet<(usize, usize)>,
    rng: &mut R,
) {
    let in_u = gp.mask(u);
    let flip = |w: usize, x: usize, chosen: &mut HashSet<(usize, usize)>| {
        if !chosen.remove(&(w, x)) {
            chosen.insert((w, x));
        }
    };
    let res_deg = |v: usize, chosen: &HashSet<(usize, usize)>| {
        gp.neighbors(v)
            .iter()
            .filter(|&&y| {
                if in_u[v] {
                    chosen.contains(&(y, v))
                } else {
                    chosen.contains(&(v, y))
                }
            })
            .count()
    };
    // Degree of v in G': d_G(v) minus reservoir edges, minus U-internal edges for v ∈ U.
    let g1_deg = |v: usize, chosen: &HashSet<(usize, usize)>| {
        let inner = if in_u[v] {
            gp.neighbors(v).iter().filter(|&&y| in_u[y]).count()
        } else {
            0
        };
        gp.degree(v) - inner - res_deg(v, chosen)
    };
    let mut odd_w: Vec<usize> = outside
        .iter()
        .copied()
        .filter(|&w| g1_deg(w, chosen) % 2 == 1)
        .collect();
    let mut odd_x: Vec<usize> = u
        .iter()
        .copied()
        .filter(|&x| g1_deg(x, chosen) % 2 == 1)
        .collect();
    odd_w.shuffle(rng);
    odd_x.shuffle(rng);
    let cross = |w: usize, x: usize| gp.has_edge(w, x);
    while let (Some(&w), Some(&x)) = (odd_w.last(), odd_x.last()) {
        if cross(w, x) {
            flip(w, x, chosen);
            odd_w.pop();
            odd_x.pop();
        } else {
            break;
        }
    }
    while odd_w.len() >= 2 {
        let (a, b) = (odd_w.pop().unwrap(), odd_w.pop().unwrap());
        let mut common: Vec<usize> = u
            .iter()
            .copied()
            .filter(|&x| cross(a, x) && cross(b, x))
            .collect();
        common.shuffle(rng);
        if let Some(&x) = common.iter().min_by_key(|&&x| res_deg(x, chosen)) {
            flip(a, x, chosen);
            flip(b, x, chosen);
        }
    }
    while odd_x.len() >= 2 {
        let (a, b) = (odd_x.pop().unwrap(), odd_x.pop().unwrap());
        let mut common: Vec<usize> = outside
            .iter()
            .copied()
            .filter(|&w| cross(w, a) && cross(w, b))
            .collect();
        common.shuffle(rng);
        if let Some(&w) = common.iter().min_by_key(|&&w| res_deg(w, chosen)) {
            flip(w, a, chosen);
            flip(w, b, chosen);
        }
    }
}

/// Greedy list assignment: every edge `ab` gets an option `x` such that no
/// two edges sharing an endpoint get the same `x`. Most-constrained edges
/// go first; ties are broken by a fresh random order on each restart.
fn assign_psi<R: Rng + ?Sized>(
    edges: &[(usize, usize)],
    options: &[Vec<usize>],
    restarts: usize,
    rng: &mut R,
) -> Result<Vec<usize>, CoverDownError> {
    let mut worst = None;
    for _ in 0..restarts.max(1) {
        let mut used: HashSet<(usize, usize)> = HashSet::new();
        let mut out = vec![usize::MAX; edges.len()];
        let mut todo: Vec<usize> = (0..edges.len()).collect();
        todo.shuffle(rng);
        let mut failed = None;
        while !todo.is_empty() {
            let free = |i: usize, used: &HashSet<(usize, usize)>| -> Vec<usize> {
                let (a, b) = edges[i];
                options[i]
                    .iter()
                    .copied()
                    .filter(|&x| !used.contains(&(a, x)) && !used.contains(&(b, x)))
                    .collect()
            };
            let (pos, _) = todo
                .iter()
                .enumerate()
                .map(|(p, &i)| (p, free(i, &used).len()))
                .min_by_key(|&(_, c)| c)
                .unwrap();
            let i = todo.swap_remove(pos);
            let f = free(i, &used);
            if f.is_empty() {
                failed = Some(edges[i]);
                break;
            }
            let x = f[rng.gen_range(0..f.len())];
            let (a, b) = edges[i];
            used.insert((a, x));
            used.insert((b, x));
            out[i] = x;
        }
        match failed {
            None => return Ok(out),
            Some(e) => worst = Some(e),
        }
    }
    Err(CoverDownError::PsiExhausted {
        edge: worst.unwrap(),
        restarts,
    })
}
