use std::collections::HashSet;

use designforge_graph::{
    build_base_graph, named_stream, rng_from_seed, BaseKind, DfRng, ExposureLedger, Graph,
    LedgerError, Part, Triangle,
};
use designforge_matching::{reservoir_matchings, ReservoirConfig, ReservoirInstance};
use designforge_nibble::{
    measured_degree, pseudo_matching, NibbleConfig, TriangleHypergraph,
};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use crate::common::{claim_all, remove_triangle, triangle_matching};
use crate::equitable::equitable_edge_colouring;
use crate::output::{ReductionError, ReductionOutput, StageStats};
use crate::packing::improve_packing;

#[derive(Debug, Clone, PartialEq)]
pub struct Red2Config {
    pub eps: f64,
    pub p: f64,
    /// Threshold constant; only reported.
    pub c: f64,
    pub gamma: f64,
    pub seed: u64,
    /// Cap on the batch count `K = ⌊1/γ⁴⌋`.
    pub max_batches: usize,
    /// Cap on the tracked sets `E_s(c, c')` per batch; more are subsampled.
    pub max_tracked: usize,
    pub nibble: NibbleConfig,
    /// Hill-climbing steps on each batch packing after the nibble (0 = off).
    pub polish_steps: usize,
    pub polish_temp: f64,
    /// Centre subsets tried per colour-class pair in Step 3.
    pub class_attempts: usize,
    /// Fresh attempts for the matching steps (Steps 2–4).
    pub matching_retries: usize,
}

impl Default for Red2Config {
    fn default() -> Self {
        Red2Config {
            eps: 0.12,
            p: 1.0,
            c: 12.0,
            gamma: 0.05,
            seed: 0,
            max_batches: 1,
            max_tracked: 4000,
            nibble: NibbleConfig::default(),
            polish_steps: 50_000,
            polish_temp: 0.5,
            class_attempts: 50,
            matching_retries: 20,
        }
    }
}

/// The labelled sets of one red2 run.
#[derive(Debug, Clone, Serialize)]
pub struct Red2Sets {
    pub v: [Vec<usize>; 2],
    pub c1: Vec<usize>,
    pub c2: Vec<usize>,
    pub c2_prime: Vec<usize>,
}

fn stage_err(stage: &str, seed: u64, e: impl ToString) -> ReductionError {
    ReductionError::Stage {
        stage: stage.into(),
        seed,
        message: e.to_string(),
    }
}

fn ledger_err(stage: &'static str, seed: u64) -> impl Fn(LedgerError) -> ReductionError {
    move |e| stage_err(stage, seed, e)
}

/// `⌊1/γ⁴⌋`, or `None` when it is below 1.
pub fn batch_count(gamma: f64) -> Option<usize> {
    if !(gamma > 0.0) {
        return None;
    }
    let k = (1.0 / gamma.powi(4) + 1e-9).floor();
    (k >= 1.0).then(|| k.min(usize::MAX as f64) as usize)
}

/// 1-factorization reduction on the join graph of `K_{2n}`.
///
/// The base graph has `V1, V2` of size `n`, `C1` of size `n − 1`, `C2` of
/// size `n`, and every edge with an end in `V1 ∪ V2`. Edge-disjoint
/// exposed triangles are removed so that every `c ∈ C1 ∪ C2'` is isolated
/// in the residual `H`, `V1` and `V2` are independent, and `H[V1 ∪ V2]` is
/// `(|C2| − |C2'|)`-regular.
///
/// Step 1 runs a tracked nibble per batch of `C1` centres over a random
/// share of `G[V1] ∪ G[V2]` and equalizes the leftovers `W1(c)`, `W2(c)`;
/// Step 2 clears `C1` with edge-disjoint perfect matchings of
/// `G[W1(c), W2(c)]`; Step 3 covers what is left inside `V1`, `V2`
/// through `C2'`, one equitable colour-class pair at a time; Step 4 clears
/// `C2'` with perfect matchings between its two neighbourhoods.
pub fn one_f_reduce(n: usize, cfg: &Red2Config) -> Result<ReductionOutput, ReductionError> {
    let seed = cfg.seed;
    if !(cfg.p > 0.0 && cfg.p <= 1.0) {
        return Err(ReductionError::Param(format!("p = {} outside (0, 1]", cfg.p)));
    }
    let k_nominal = batch_count(cfg.gamma).ok_or_else(|| {
        ReductionError::Param(format!("γ = {} gives ⌊1/γ⁴⌋ < 1 batches", cfg.gamma))
    })?;
    if cfg.max_batches == 0 {
        return Err(ReductionError::Param("batch cap must be positive".into()));
    }
    let g = build_base_graph(&BaseKind::JoinBase { eps: cfg.eps }, n)
        .map_err(|e| ReductionError::Param(e.to_string()))?;
    let sets = red2_sets(&g);
    if sets.c2_prime.is_empty() {
        return Err(ReductionError::Param(format!(
            "|C2'| = ⌊{} · {n}⌋ = 0",
            cfg.eps
        )));
    }
    let k = k_nominal.min(cfg.max_batches).min(sets.c1.len()).max(1);
    let mut rng = rng_from_seed(named_stream(seed, "red2"));
    let mut ledger = ExposureLedger::new(seed, cfg.p).map_err(ledger_err("setup", seed))?;
    register_families(&g, &sets, &mut ledger).map_err(ledger_err("setup", seed))?;
    let mut stats = vec![StageStats {
        stage: "setup".into(),
        triangles: 0,
        detail: json!({
            "n": n, "eps": cfg.eps, "gamma": cfg.gamma, "p": cfg.p, "c": cfg.c,
            "p_over_c_log_n_over_n": cfg.p * (2 * n) as f64 / (cfg.c * ((2 * n) as f64).ln()),
            "k_nominal": k_nominal, "k": k,
            "c2_prime": sets.c2_prime.len(),
            "universe": ledger.universe_size(),
        }),
    }];
    let mut all: Vec<Triangle> = Vec::new();
    let mut cur = g.clone();

    let s1 = step1(&cur, &sets, k, &mut ledger, cfg, &mut rng)?;
    for t in &s1.triangles {
        remove_triangle(&mut cur, t);
    }
    stats.push(StageStats {
        stage: "step1".into(),
        triangles: s1.triangles.len(),
        detail: s1.detail,
    });
    all.extend(s1.triangles);

    let (t2, d2) = step2(&cur, &sets, &s1.w, &s1.batch_of, &mut ledger, cfg, &mut rng)?;
    for t in &t2 {
        remove_triangle(&mut cur, t);
    }
    if let Some(&c) = sets.c1.iter().find(|&&c| cur.degree(c) > 0) {
        return Err(stage_err("step2", seed, format!("d({c}) = {} on C1", cur.degree(c))));
    }
    stats.push(StageStats {
        stage: "step2".into(),
        triangles: t2.len(),
        detail: d2,
    });
    all.extend(t2);

    let (t3, d3) = step3(&cur, &sets, &mut ledger, cfg, &mut rng)?;
    for t in &t3 {
        remove_triangle(&mut cur, t);
    }
    stats.push(StageStats {
        stage: "step3".into(),
        triangles: t3.len(),
        detail: d3,
    });
    all.extend(t3);

    let t4 = step4(&cur, &sets, &mut ledger, cfg, &mut rng)?;
    for t in &t4 {
        remove_triangle(&mut cur, t);
    }
    stats.push(StageStats {
        stage: "step4".into(),
        triangles: t4.len(),
        detail: json!({ "centres": sets.c2_prime.len() }),
    });
    all.extend(t4);

    let audit = ledger.audit(&all);
    if !audit.is_clean() {
        return Err(ReductionError::Validation {
            seed,
            message: format!("ledger audit failed: {audit:?}"),
        });
    }
    check_red2(&g, &cur, &all, &sets).map_err(|message| ReductionError::Validation { seed, message })?;
    let mut parts: Vec<Part> = g.parts().to_vec();
    parts.extend(g.marked().iter().cloned());
    Ok(ReductionOutput {
        seed,
        triangles: all,
        residual: cur,
        parts,
        stats,
    })
}

fn red2_sets(g: &Graph) -> Red2Sets {
    let part = |l: &str| g.part(l).expect("join base has labelled parts").to_vec();
    Red2Sets {
        v: [part("V1"), part("V2")],
        c1: part("C1"),
        c2: part("C2"),
        c2_prime: g.marked()[0].vertices.clone(),
    }
}

/// `A_c` and `B_c` for `c ∈ C1` and for `c ∈ C2'`, as four disjoint families.
fn register_families(g: &Graph, s: &Red2Sets, ledger: &mut ExposureLedger) -> Result<(), LedgerError> {
    let inner: Vec<(usize, usize)> = s.v.iter().flat_map(|p| g.induced_edges(p)).collect();
    for (name, centres, cross) in [
        ("A_C1", &s.c1, false),
        ("B_C1", &s.c1, true),
        ("A_C2'", &s.c2_prime, false),
        ("B_C2'", &s.c2_prime, true),
    ] {
        let mut fam = Vec::new();
        for &c in centres.iter() {
            if cross {
                for &a in &s.v[0] {
                    for &b in &s.v[1] {
                        fam.push(Triangle::new(a, b, c));
                    }
                }
            } else {
                for &(a, b) in &inner {
                    fam.push(Triangle::new(a, b, c));
                }
            }
        }
        ledger.register_family(name, fam)?;
    }
    Ok(())
}

struct Step1 {
    triangles: Vec<Triangle>,
    /// `[W1(c), W2(c)]` indexed like `C1`.
    w: Vec<[Vec<usize>; 2]>,
    batch_of: Vec<usize>,
    detail: serde_json::Value,
}

/// Side (0 or 1) of the two non-centre vertices of `t`.
fn side(t: &Triangle, n: usize) -> usize {
    usize::from(t.vertices()[0] >= n)
}

fn step1(
    g: &Graph,
    s: &Red2Sets,
    k: usize,
    ledger: &mut ExposureLedger,
    cfg: &Red2Config,
    rng: &mut DfRng,
) -> Result<Step1, ReductionError> {
    let seed = cfg.seed;
    let n = s.v[0].len();
    let m = s.c1.len();
    let c_index = |c: usize| c - 2 * n;
    let mut shares: Vec<Vec<(usize, usize)>> = vec![Vec::new(); k];
    for p in &s.v {
        for e in g.induced_edges(p) {
            shares[rng.gen_range(0..k)].push(e);
        }
    }
    let batches: Vec<Vec<usize>> = (0..k).map(|j| s.c1[j * m / k..(j + 1) * m / k].to_vec()).collect();
    let mut batch_of = vec![0; m];
    for (j, b) in batches.iter().enumerate() {
        for &c in b {
            batch_of[c_index(c)] = j;
        }
    }
    let mut w: Vec<[Vec<usize>; 2]> = vec![Default::default(); m];
    let mut out = Vec::new();
    let mut batch_stats = Vec::new();
    let mut leftover_inner: Vec<Graph> = Vec::new();
    let both: Vec<usize> = s.v[0].iter().chain(&s.v[1]).copied().collect();
    for (i, centres) in batches.iter().enumerate() {
        let mut gi = Graph::new(g.vertex_count());
        for &(a, b) in &shares[i] {
            gi.add_edge(a, b);
        }
        for &c in centres {
            for &v in &both {
                gi.add_edge(v, c);
            }
        }
        let mut present = Vec::new();
        for &c in centres {
            for &(a, b) in &shares[i] {
                let t = Triangle::new(a, b, c);
                if ledger.expose(&t).map_err(ledger_err("step1", seed))? {
                    present.push(t);
                }
            }
        }
        let aux = TriangleHypergraph::new(&gi, present.clone());
        let idx = |a: usize, b: usize| {
            aux.graph_edges
                .binary_search(&(a.min(b), a.max(b)))
                .expect("edge of the batch graph")
        };
        // Tracked family F_i.
        let mut family: Vec<Vec<usize>> = Vec::new();
        for &c in centres {
            for p in &s.v {
                family.push(p.iter().map(|&v| idx(v, c)).collect());
            }
        }
        let mut cross: Vec<Vec<usize>> = Vec::new();
        for &c in centres {
            for (cp, wc) in w.iter().enumerate() {
                if batch_of[cp] >= i {
                    continue;
                }
                for ws in wc {
                    if !ws.is_empty() {
                        cross.push(ws.iter().map(|&v| idx(v, c)).collect());
                    }
                }
            }
        }
        let cross_total = cross.len();
        if cross.len() > cfg.max_tracked {
            cross.shuffle(rng);
            cross.truncate(cfg.max_tracked);
        }
        let tracked_cross = cross.len();
        family.extend(cross);
        for &v in &both {
            let star: Vec<usize> = gi
                .neighbors(v)
                .iter()
                .filter(|&&x| x < 2 * n)
                .map(|&x| idx(v, x))
                .collect();
            if !star.is_empty() {
                family.push(star);
            }
            family.push(centres.iter().map(|&c| idx(v, c)).collect());
        }
        let h = &aux.hypergraph;
        let d = measured_degree(h, &vec![true; h.vertex_count()]);
        let ncfg = NibbleConfig {
            gamma: cfg.gamma,
            ..cfg.nibble.clone()
        };
        let pm = pseudo_matching(h, d, &family, &ncfg, rng)
            .map_err(|e| stage_err("step1", seed, format!("batch {}: {e}", i + 1)))?;
        let mut chosen: Vec<Triangle> = pm.matching.iter().map(|&e| aux.triangles[e]).collect();
        let nibble_uncovered = gi.edge_count() - 3 * chosen.len();
        if cfg.polish_steps > 0 {
            chosen = improve_packing(&gi, &present, &chosen, |_, _| 1, cfg.polish_temp, cfg.polish_steps, rng);
        }
        let polished_uncovered = gi.edge_count() - 3 * chosen.len();

        // Equalize |W1(c)| = |W2(c)| by dropping triangles on the side
        // with more of them.
        let mut per_c: Vec<[Vec<Triangle>; 2]> = vec![Default::default(); centres.len()];
        let pos = |c: usize| centres.iter().position(|&x| x == c).unwrap();
        for t in &chosen {
            let c = t.vertices()[2];
            per_c[pos(c)][side(t, n)].push(*t);
        }
        let mut removed = 0;
        let mut kept = Vec::new();
        for (ci, &c) in centres.iter().enumerate() {
            let [a, b] = &mut per_c[ci];
            let (more, less) = if a.len() >= b.len() { (a, b) } else { (b, a) };
            let drop = more.len() - less.len();
            more.shuffle(rng);
            more.drain(..drop);
            removed += drop;
            let mut cover = HashSet::new();
            for t in more.iter().chain(less.iter()) {
                let [x, y, _] = t.vertices();
                cover.insert(x);
                cover.insert(y);
                kept.push(*t);
            }
            for (sd, p) in s.v.iter().enumerate() {
                w[c_index(c)][sd] = p.iter().copied().filter(|v| !cover.contains(v)).collect();
            }
        }
        claim_all(ledger, &kept, "step1").map_err(ledger_err("step1", seed))?;
        let mut left = Graph::new(g.vertex_count());
        for &(a, b) in &shares[i] {
            left.add_edge(a, b);
        }
        for t in &kept {
            let [x, y, _] = t.vertices();
            left.remove_edge(x, y);
        }
        leftover_inner.push(left);
        batch_stats.push(json!({
            "centres": centres.len(),
            "share_edges": shares[i].len(),
            "aux_edges": h.edge_count(),
            "aux_mean_degree": d,
            "tracked_sets": family.len(),
            "cross_sets_total": cross_total,
            "cross_sets_tracked": tracked_cross,
            "band_hit_rate": pm.band_hit_rate(),
            "nibble_uncovered": nibble_uncovered,
            "polished_uncovered": polished_uncovered,
            "balance_removed": removed,
            "triangles": kept.len(),
        }));
        out.extend(kept);
    }
    let detail = json!({
        "batches": batch_stats,
        "windows": windows(s, &w, &batch_of, &leftover_inner, k, cfg.gamma),
    });
    Ok(Step1 {
        triangles: out,
        w,
        batch_of,
        detail,
    })
}

/// Fractions of the Step 1 window conditions met: `|W(c)|` in
/// `[0.8γn, 2γn]`, cross-batch overlaps in `[0.64γ²n, 4γ²n]`, and leftover
/// degrees and `W`-memberships per batch within `[0.6γn/K, 2γn/K]`.
fn windows(
    s: &Red2Sets,
    w: &[[Vec<usize>; 2]],
    batch_of: &[usize],
    left: &[Graph],
    k: usize,
    gamma: f64,
) -> serde_json::Value {
    let n = s.v[0].len() as f64;
    let within = |x: usize, lo: f64, hi: f64| (x as f64) >= lo - 1e-9 && (x as f64) <= hi + 1e-9;
    let frac = |hit: usize, all: usize| if all == 0 { 1.0 } else { hit as f64 / all as f64 };
    let sizes: Vec<usize> = w.iter().map(|x| x[0].len()).collect();
    let size_hits = sizes.iter().filter(|&&x| within(x, 0.8 * gamma * n, 2.0 * gamma * n)).count();
    let (mut ov_all, mut ov_hit) = (0, 0);
    for a in 0..w.len() {
        for b in a + 1..w.len() {
            if batch_of[a] == batch_of[b] {
                continue;
            }
            for sd in 0..2 {
                let x: HashSet<_> = w[a][sd].iter().collect();
                let o = w[b][sd].iter().filter(|v| x.contains(v)).count();
                ov_all += 1;
                ov_hit += usize::from(within(o, 0.64 * gamma * gamma * n, 4.0 * gamma * gamma * n));
            }
        }
    }
    let (lo, hi) = (0.6 * gamma * n / k as f64, 2.0 * gamma * n / k as f64);
    let (mut deg_all, mut deg_hit, mut mem_all, mut mem_hit) = (0, 0, 0, 0);
    for (j, lg) in left.iter().enumerate() {
        for (sd, p) in s.v.iter().enumerate() {
            for &v in p {
                deg_all += 1;
                deg_hit += usize::from(within(lg.degree(v), lo, hi));
                let mem = (0..w.len())
                    .filter(|&c| batch_of[c] == j && w[c][sd].contains(&v))
                    .count();
                mem_all += 1;
                mem_hit += usize::from(mem as f64 <= hi + 1e-9);
            }
        }
    }
    json!({
        "w_size_min": sizes.iter().min(), "w_size_max": sizes.iter().max(),
        "w_size_in_window": frac(size_hits, sizes.len()),
        "overlap_in_window": frac(ov_hit, ov_all),
        "leftover_degree_in_window": frac(deg_hit, deg_all),
        "membership_in_window": frac(mem_hit, mem_all),
    })
}

/// Edge-disjoint perfect matchings of `G[W1(c), W2(c)]` through present
/// triangles with `c`, for every `c ∈ C1`.
fn step2(
    g: &Graph,
    s: &Red2Sets,
    w: &[[Vec<usize>; 2]],
    batch_of: &[usize],
    ledger: &mut ExposureLedger,
    cfg: &Red2Config,
    rng: &mut DfRng,
) -> Result<(Vec<Triangle>, serde_json::Value), ReductionError> {
    let seed = cfg.seed;
    let n = s.v[0].len();
    let live: Vec<usize> = (0..s.c1.len()).filter(|&i| !w[i][0].is_empty()).collect();
    let mut instances = Vec::with_capacity(live.len());
    for &i in &live {
        let c = s.c1[i];
        let [l, r] = &w[i];
        if l.len() != r.len() {
            return Err(stage_err(
                "step2",
                seed,
                format!("|W1({c})| = {} ≠ |W2({c})| = {}", l.len(), r.len()),
            ));
        }
        let mut edges = Vec::new();
        for (a, &x) in l.iter().enumerate() {
            for (b, &y) in r.iter().enumerate() {
                if let Some(t) = Triangle::in_graph(g, x, y, c) {
                    if ledger.expose(&t).map_err(ledger_err("step2", seed))? {
                        edges.push((a, b));
                    }
                }
            }
        }
        instances.push(ReservoirInstance {
            left: l.clone(),
            right: r.clone(),
            edges,
        });
    }
    let exempt: Vec<Vec<usize>> = live
        .iter()
        .map(|&i| {
            (0..live.len())
                .filter(|&j| batch_of[live[j]] == batch_of[i])
                .collect()
        })
        .collect();
    let rcfg = ReservoirConfig {
        exempt,
        ..ReservoirConfig::new(n - 1, 2.0 * cfg.gamma)
    };
    let mut last = String::new();
    for _ in 0..=cfg.matching_retries {
        match reservoir_matchings(&instances, &rcfg, rng) {
            Ok(res) => {
                let mut out = Vec::new();
                for (m, &i) in res.matchings.iter().zip(&live) {
                    for &(x, y) in m {
                        out.push(Triangle::new(x, y, s.c1[i]));
                    }
                }
                claim_all(ledger, &out, "step2").map_err(ledger_err("step2", seed))?;
                let detail = json!({
                    "instances": live.len(),
                    "conditions": res.conditions,
                });
                return Ok((out, detail));
            }
            Err(e) => last = e.to_string(),
        }
    }
    Err(stage_err("step2", seed, last))
}

/// Covers `G'[V1] ∪ G'[V2]` through `C2'`: equitable `q`-colourings of both
/// sides, classes paired by size, and for each pair a centre set
/// `C2'(r)` of size `n_r` perfectly matched to both classes.
fn step3(
    g: &Graph,
    s: &Red2Sets,
    ledger: &mut ExposureLedger,
    cfg: &Red2Config,
    rng: &mut DfRng,
) -> Result<(Vec<Triangle>, serde_json::Value), ReductionError> {
    let seed = cfg.seed;
    let n = s.v[0].len();
    let sides: Vec<Graph> = s
        .v
        .iter()
        .map(|p| {
            let mut h = Graph::new(g.vertex_count());
            for (a, b) in g.induced_edges(p) {
                h.add_edge(a, b);
            }
            h
        })
        .collect();
    let e = sides[0].edge_count();
    if sides[1].edge_count() != e {
        return Err(stage_err(
            "step3",
            seed,
            format!("e(G'[V1]) = {e} ≠ e(G'[V2]) = {}", sides[1].edge_count()),
        ));
    }
    let delta = sides.iter().map(Graph::max_degree).max().unwrap_or(0);
    let q_nominal = (cfg.gamma.powf(2.0 / 3.0) * n as f64).ceil() as usize;
    let k2 = s.c2_prime.len();
    let q_base = q_nominal.max(delta + 1).max(e.div_ceil(k2)).max(1);
    let mut last = String::new();
    for attempt in 0..=cfg.matching_retries {
        let q = q_base + attempt;
        let snapshot = ledger.clone();
        match cover_classes(g, &sides, s, q, ledger, cfg, rng) {
            Ok((out, load)) => {
                claim_all(ledger, &out, "step3").map_err(ledger_err("step3", seed))?;
                let detail = json!({
                    "edges_per_side": e, "max_degree": delta,
                    "q_nominal": q_nominal, "q": q,
                    "centre_load": load,
                });
                return Ok((out, detail));
            }
            Err(m) => {
                last = m;
                *ledger = snapshot;
            }
        }
    }
    Err(stage_err("step3", seed, last))
}

fn cover_classes(
    g: &Graph,
    sides: &[Graph],
    s: &Red2Sets,
    q: usize,
    ledger: &mut ExposureLedger,
    cfg: &Red2Config,
    rng: &mut DfRng,
) -> Result<(Vec<Triangle>, Vec<usize>), String> {
    let mut classes = Vec::new();
    for h in sides {
        let mut cl = equitable_edge_colouring(h, q).map_err(|e| e.to_string())?.classes;
        cl.shuffle(rng);
        cl.sort_by_key(|c| std::cmp::Reverse(c.len()));
        classes.push(cl);
    }
    let k2 = s.c2_prime.len();
    let mut cur = g.clone();
    let mut load = vec![0usize; k2];
    let mut out = Vec::new();
    for (r, (m1, m2)) in classes[0].iter().zip(&classes[1]).enumerate() {
        if m1.len() != m2.len() {
            return Err(format!("class pair {r} has sizes {} and {}", m1.len(), m2.len()));
        }
        let h = m1.len();
        if h == 0 {
            continue;
        }
        if h > k2 {
            return Err(format!("class {r} of size {h} exceeds |C2'| = {k2}"));
        }
        let mut found = None;
        for a in 0..cfg.class_attempts.max(1) {
            let mut order: Vec<usize> = (0..k2).collect();
            order.shuffle(rng);
            if a == 0 {
                order.sort_by_key(|&i| load[i]);
            }
            let pick: Vec<usize> = order[..h].iter().map(|&i| s.c2_prime[i]).collect();
            let mut both = Vec::new();
            for m in [m1, m2] {
                let tri = |x: usize, y: usize| Triangle::in_graph(&cur, m[y].0, m[y].1, pick[x]);
                match triangle_matching(h, h, tri, ledger, rng).map_err(|e| e.to_string())? {
                    Some(ts) => both.extend(ts),
                    None => break,
                }
            }
            if both.len() == 2 * h {
                found = Some((both, order[..h].to_vec()));
                break;
            }
        }
        let (ts, used) =
            found.ok_or_else(|| format!("no centre set matches class pair {r} of size {h}"))?;
        for t in &ts {
            remove_triangle(&mut cur, t);
        }
        for i in used {
            load[i] += 1;
        }
        out.extend(ts);
    }
    Ok((out, load))
}

/// For each `c ∈ C2'`, a perfect matching between `N(c) ∩ V1` and
/// `N(c) ∩ V2` through present triangles with `c`, all edge-disjoint.
fn step4(
    g2: &Graph,
    s: &Red2Sets,
    ledger: &mut ExposureLedger,
    cfg: &Red2Config,
    rng: &mut DfRng,
) -> Result<Vec<Triangle>, ReductionError> {
    let seed = cfg.seed;
    let m1 = g2.mask(&s.v[0]);
    let m2 = g2.mask(&s.v[1]);
    for &c in &s.c2_prime {
        let (a, b) = (g2.degree_into(c, &m1), g2.degree_into(c, &m2));
        if a != b {
            return Err(stage_err(
                "step4",
                seed,
                format!("|N({c}) ∩ V1| = {a} ≠ |N({c}) ∩ V2| = {b}"),
            ));
        }
    }
    let mut last = String::new();
    for _ in 0..=cfg.matching_retries {
        let snapshot = ledger.clone();
        let mut g = g2.clone();
        let mut out = Vec::new();
        let mut order = s.c2_prime.clone();
        order.shuffle(rng);
        let mut ok = true;
        for &c in &order {
            let l: Vec<usize> = g.neighbors(c).iter().copied().filter(|&x| m1[x]).collect();
            let r: Vec<usize> = g.neighbors(c).iter().copied().filter(|&x| m2[x]).collect();
            let tri = |a: usize, b: usize| Triangle::in_graph(&g, l[a], r[b], c);
            match triangle_matching(l.len(), r.len(), tri, ledger, rng).map_err(ledger_err("step4", seed))? {
                Some(m) => {
                    for t in &m {
                        remove_triangle(&mut g, t);
                    }
                    out.extend(m);
                }
                None => {
                    last = format!("no perfect matching for centre {c} on {} + {}", l.len(), r.len());
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            claim_all(ledger, &out, "step4").map_err(ledger_err("step4", seed))?;
            return Ok(out);
        }
        *ledger = snapshot;
    }
    Err(stage_err("step4", seed, last))
}

/// Conclusions (a)–(b) and the edge partition, by exact scan.
fn check_red2(base: &Graph, h: &Graph, ts: &[Triangle], s: &Red2Sets) -> Result<(), String> {
    if h.edge_count() + 3 * ts.len() != base.edge_count() {
        return Err(format!(
            "e(H) + 3|T| = {} + {} ≠ e(G) = {}",
            h.edge_count(),
            3 * ts.len(),
            base.edge_count()
        ));
    }
    if let Some(&c) = s.c1.iter().chain(&s.c2_prime).find(|&&c| h.degree(c) > 0) {
        return Err(format!("d_H({c}) = {} on C1 ∪ C2'", h.degree(c)));
    }
    for (i, p) in s.v.iter().enumerate() {
        if let Some(&(a, b)) = h.induced_edges(p).first() {
            return Err(format!("H has edge {a}-{b} inside V{}", i + 1));
        }
    }
    let want = s.c2.len() - s.c2_prime.len();
    let inner = h.mask(&s.v.concat());
    for &x in s.v[0].iter().chain(&s.v[1]) {
        let d = h.degree_into(x, &inner);
        if d != want {
            return Err(format!("d_H[V1 ∪ V2]({x}) = {d}, want {want}"));
        }
    }
    Ok(())
}
