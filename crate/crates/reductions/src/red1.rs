use designforge_graph::{
    build_base_graph, enumerate_triangles, floor_eps, named_stream, rng_from_seed, BaseKind, DfRng,
    ExposureLedger, Graph, LedgerError, Part, Triangle,
};
use designforge_nibble::{almost_triangle_decomposition, AlmostConfig};
use rand::seq::SliceRandom;
use serde::Serialize;
use serde_json::json;

use crate::balance::{balance_divisibility, BalanceConfig};
use crate::common::{claim_all, remove_triangle, triangle_matching};
use crate::coverdown::{cover_down_part, CoverDownConfig};
use crate::output::{ReductionError, ReductionOutput, StageStats};

#[derive(Debug, Clone, PartialEq)]
pub struct Red1Config {
    pub eps: f64,
    pub p: f64,
    /// Threshold constant; only reported as `p · n / ln n` against it.
    pub c: f64,
    pub eps2: f64,
    /// Index of `v*` inside `W3` (used when `n ≡ 1 mod 6`).
    pub v_star: usize,
    pub seed: u64,
    pub cover: CoverDownConfig,
    pub balance: BalanceConfig,
    /// Fresh random attempts for the matching steps (Steps 1 and 4).
    pub matching_retries: usize,
}

impl Default for Red1Config {
    fn default() -> Self {
        Red1Config {
            eps: 0.12,
            p: 1.0,
            c: 12.0,
            eps2: 0.02,
            v_star: 0,
            seed: 0,
            cover: CoverDownConfig::default(),
            balance: BalanceConfig::default(),
            matching_retries: 20,
        }
    }
}

/// The labelled sets of one red1 run.
#[derive(Debug, Clone, Serialize)]
pub struct Red1Sets {
    pub v: [Vec<usize>; 3],
    pub w3: Vec<usize>,
    pub u: [Vec<usize>; 3],
    pub v_star: Option<usize>,
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

/// Steiner triple system reduction on `K_n`, `n ≡ 1, 3 mod 6`.
///
/// Removes edge-disjoint exposed triangles from the base graph so that the
/// residual `H` is tripartite with parts `V1, V2, V3`, every `u ∈ W3` is
/// isolated, and `H[V1 ∪ V2]` is `(|V3| − |W3|)`-regular. The base graph
/// omits the edges between `V1 ∪ V2` and `V3 ∖ W3`, which no triangle
/// touches and which belong to `H` on `K_n`.
///
/// Step 1 (`n ≡ 1`) covers `G[V1]`, `G[V2]` through `v*`; Step 2 covers
/// each part down to `U_i` and equalizes `e(G²[U_i])`; Step 3 balances
/// divisibility; Step 4 clears `U3` by perfect matchings between `V1`
/// and `V2`.
pub fn sts_reduce(n: usize, cfg: &Red1Config) -> Result<ReductionOutput, ReductionError> {
    let seed = cfg.seed;
    if !(cfg.p > 0.0 && cfg.p <= 1.0) {
        return Err(ReductionError::Param(format!(
            "p = {} outside (0, 1]",
            cfg.p
        )));
    }
    if !(cfg.eps2 > 0.0 && cfg.eps2 < cfg.eps) {
        return Err(ReductionError::Param(format!(
            "ε₂ = {} must lie in (0, ε = {})",
            cfg.eps2, cfg.eps
        )));
    }
    let rem = n % 6;
    if rem != 1 && rem != 3 {
        return Err(ReductionError::Divisibility { n, rem });
    }
    let g = build_base_graph(&BaseKind::StsBase { eps: cfg.eps }, n)
        .map_err(|e| ReductionError::Param(e.to_string()))?;
    let sets = red1_sets(&g, n, cfg)?;
    let mut rng = rng_from_seed(named_stream(seed, "red1"));
    let mut ledger = ExposureLedger::new(seed, cfg.p).map_err(ledger_err("setup", seed))?;
    register_families(&g, &sets, &mut ledger).map_err(ledger_err("setup", seed))?;
    let mut stats = vec![StageStats {
        stage: "setup".into(),
        triangles: 0,
        detail: json!({
            "n": n, "eps": cfg.eps, "eps2": cfg.eps2, "p": cfg.p, "c": cfg.c,
            "p_over_c_log_n_over_n": cfg.p * n as f64 / (cfg.c * (n as f64).ln()),
            "u_size": sets.u[0].len(), "w3_size": sets.w3.len(),
            "universe": ledger.universe_size(),
        }),
    }];
    let mut all: Vec<Triangle> = Vec::new();
    let mut cur = g.clone();

    // Step 1.
    let t1 = match sets.v_star {
        Some(vs) => step1(&cur, &sets, vs, &mut ledger, cfg, &mut rng)?,
        None => Vec::new(),
    };
    for t in &t1 {
        remove_triangle(&mut cur, t);
    }
    stats.push(StageStats {
        stage: "step1".into(),
        triangles: t1.len(),
        detail: json!({ "v_star": sets.v_star }),
    });
    all.extend(t1);

    // Step 2: cover down each part, then almost-decompose inside U_i.
    let mut cover_reports = Vec::new();
    let mut covered = 0;
    let mut inner: [Vec<Triangle>; 3] = Default::default();
    for i in 0..3 {
        let mut part = Graph::new(n);
        for (a, b) in cur.induced_edges(&sets.v[i]) {
            part.add_edge(a, b);
        }
        let ccfg = CoverDownConfig {
            stage: "step2".into(),
            ..cfg.cover.clone()
        };
        let cd = cover_down_part(&part, &sets.u[i], &mut ledger, &ccfg, &mut rng)
            .map_err(|e| stage_err("step2", seed, format!("cover-down of V{}: {e}", i + 1)))?;
        for t in &cd.triangles {
            remove_triangle(&mut cur, t);
        }
        covered += cd.triangles.len();
        all.extend(cd.triangles);
        cover_reports.push(cd.report);

        let hp = cd.remainder;
        let candidates = enumerate_triangles(&hp, None);
        let acfg = AlmostConfig {
            gamma: cfg.eps2 * cfg.eps2,
            stage: "step2".into(),
            ..AlmostConfig::default()
        };
        let almost = almost_triangle_decomposition(&hp, &mut ledger, &candidates, &acfg, &mut rng)
            .map_err(|e| {
                stage_err(
                    "step2",
                    seed,
                    format!("almost decomposition of U{}: {e}", i + 1),
                )
            })?;
        for t in &almost.triangles {
            remove_triangle(&mut cur, t);
        }
        inner[i] = almost.triangles;
    }
    let readded = equalize(&mut cur, &sets, &mut inner, &mut ledger, &mut rng)
        .map_err(|m| stage_err("step2", seed, m))?;
    let degrees: Vec<(usize, usize)> = sets
        .u
        .iter()
        .map(|u| {
            let mask = cur.mask(u);
            let ds: Vec<usize> = u.iter().map(|&x| cur.degree_into(x, &mask)).collect();
            (
                *ds.iter().min().unwrap_or(&0),
                *ds.iter().max().unwrap_or(&0),
            )
        })
        .collect();
    let t2 = covered + inner.iter().map(Vec::len).sum::<usize>();
    for ts in &inner {
        all.extend(ts.iter().copied());
    }
    stats.push(StageStats {
        stage: "step2".into(),
        triangles: t2,
        detail: json!({
            "cover_down": cover_reports,
            "readded": readded,
            "u_edges": sets.u.iter().map(|u| cur.induced_edges(u).len()).collect::<Vec<_>>(),
            "u_degree_min_max": degrees,
        }),
    });

    // Step 3.
    let bcfg = BalanceConfig {
        eps2: cfg.eps2,
        ..cfg.balance.clone()
    };
    let bal = balance_divisibility(
        &cur,
        [&sets.u[0], &sets.u[1], &sets.u[2]],
        &mut ledger,
        &bcfg,
        &mut rng,
    )
    .map_err(|e| stage_err("step3", seed, e))?;
    cur = bal.graph;
    stats.push(StageStats {
        stage: "step3".into(),
        triangles: bal.triangles.len(),
        detail: json!({
            "report": bal.report,
            "trackers": bal.trackers,
        }),
    });
    all.extend(bal.triangles);

    // Step 4.
    let t4 = step4(&cur, &sets, &mut ledger, cfg, &mut rng)?;
    for t in &t4 {
        remove_triangle(&mut cur, t);
    }
    stats.push(StageStats {
        stage: "step4".into(),
        triangles: t4.len(),
        detail: json!({ "apexes": sets.u[2].len() }),
    });
    all.extend(t4);

    let audit = ledger.audit(&all);
    if !audit.is_clean() {
        return Err(ReductionError::Validation {
            seed,
            message: format!("ledger audit failed: {audit:?}"),
        });
    }
    check_red1(&g, &cur, &all, &sets)
        .map_err(|message| ReductionError::Validation { seed, message })?;
    let mut parts: Vec<Part> = g.parts().to_vec();
    parts.extend(g.marked().iter().cloned());
    for (i, u) in sets.u.iter().enumerate() {
        parts.push(Part::new(format!("U{}", i + 1), u.clone()));
    }
    Ok(ReductionOutput {
        seed,
        triangles: all,
        residual: cur,
        parts,
        stats,
    })
}

fn red1_sets(g: &Graph, n: usize, cfg: &Red1Config) -> Result<Red1Sets, ReductionError> {
    let part = |l: &str| g.part(l).expect("sts base has labelled parts").to_vec();
    let v = [part("V1"), part("V2"), part("V3")];
    let w3 = g.marked()[0].vertices.clone();
    let (u3, v_star) = if n % 6 == 1 {
        let vs = *w3.get(cfg.v_star).ok_or_else(|| {
            ReductionError::Param(format!(
                "v* index {} outside W3 of size {}",
                cfg.v_star,
                w3.len()
            ))
        })?;
        (
            w3.iter().copied().filter(|&x| x != vs).collect::<Vec<_>>(),
            Some(vs),
        )
    } else {
        (w3.clone(), None)
    };
    let k = u3.len();
    if k < 3 || k != floor_eps(cfg.eps, n) - usize::from(v_star.is_some()) {
        return Err(ReductionError::Param(format!("|U_i| = {k} is too small")));
    }
    let u = [v[0][..k].to_vec(), v[1][..k].to_vec(), u3];
    Ok(Red1Sets { v, w3, u, v_star })
}

/// Registers `S¹, …, S⁴` as disjoint ledger families.
fn register_families(
    g: &Graph,
    s: &Red1Sets,
    ledger: &mut ExposureLedger,
) -> Result<(), LedgerError> {
    if let Some(vs) = s.v_star {
        let mut s1 = Vec::new();
        for part in &s.v[..2] {
            for (a, b) in g.induced_edges(part) {
                s1.push(Triangle::new(a, b, vs));
            }
        }
        ledger.register_family("S1", s1)?;
    }
    let mut s2 = Vec::new();
    for part in &s.v {
        let mut h = Graph::new(g.vertex_count());
        for (a, b) in g.induced_edges(part) {
            h.add_edge(a, b);
        }
        s2.extend(enumerate_triangles(&h, None));
    }
    ledger.register_family("S2", s2)?;
    let mut s3 = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            if i == j {
                continue;
            }
            for (a, b) in g.induced_edges(&s.u[j]) {
                for &w in &s.u[i] {
                    s3.push(Triangle::new(a, b, w));
                }
            }
        }
    }
    ledger.register_family("S3", s3)?;
    let mut s4 = Vec::new();
    for &a in &s.v[0] {
        for &b in &s.v[1] {
            for &w in &s.u[2] {
                s4.push(Triangle::new(a, b, w));
            }
        }
    }
    ledger.register_family("S4", s4)?;
    Ok(())
}

/// Perfect matchings of `G[V1]`, `G[V2]` whose edges close a present
/// triangle with `v*`. Each part is split into random halves.
fn step1(
    g: &Graph,
    s: &Red1Sets,
    vs: usize,
    ledger: &mut ExposureLedger,
    cfg: &Red1Config,
    rng: &mut DfRng,
) -> Result<Vec<Triangle>, ReductionError> {
    let seed = cfg.seed;
    let mut out = Vec::new();
    for (i, part) in s.v[..2].iter().enumerate() {
        let mut found = None;
        for _ in 0..=cfg.matching_retries {
            let mut order = part.clone();
            order.shuffle(rng);
            let (l, r) = order.split_at(order.len() / 2);
            let tri = |a: usize, b: usize| Triangle::in_graph(g, l[a], r[b], vs);
            if let Some(m) = triangle_matching(l.len(), r.len(), tri, ledger, rng)
                .map_err(ledger_err("step1", seed))?
            {
                found = Some(m);
                break;
            }
        }
        let m = found.ok_or_else(|| {
            stage_err(
                "step1",
                seed,
                format!("no perfect matching of G[V{}] through v*", i + 1),
            )
        })?;
        claim_all(ledger, &m, "step1").map_err(ledger_err("step1", seed))?;
        out.extend(m);
    }
    Ok(out)
}

/// Returns triangles from `inner[i]` to `G` until the three edge counts
/// inside `U_i` are equal and even. Returns how many were re-added per part.
fn equalize(
    g: &mut Graph,
    s: &Red1Sets,
    inner: &mut [Vec<Triangle>; 3],
    ledger: &mut ExposureLedger,
    rng: &mut DfRng,
) -> Result<[usize; 3], String> {
    let e: Vec<usize> = s.u.iter().map(|u| g.induced_edges(u).len()).collect();
    if e.iter().any(|&x| x % 3 != e[0] % 3) {
        return Err(format!("e(G[U_i]) = {e:?} differ mod 3"));
    }
    let lo = *e.iter().max().unwrap();
    let hi = (0..3).map(|i| e[i] + 3 * inner[i].len()).min().unwrap();
    let target = (lo..=hi)
        .find(|&x| x % 3 == e[0] % 3 && x % 2 == 0)
        .ok_or_else(|| format!("no even common count in [{lo}, {hi}] for e(G[U_i]) = {e:?}"))?;
    let mut readded = [0; 3];
    for i in 0..3 {
        let k = (target - e[i]) / 3;
        inner[i].shuffle(rng);
        for t in inner[i].drain(..k) {
            for (a, b) in t.edges() {
                g.add_edge(a, b);
            }
            ledger.unclaim(&t);
        }
        readded[i] = k;
    }
    Ok(readded)
}

/// For each `w ∈ U3`, a perfect matching between `N(w) ∩ V1` and
/// `N(w) ∩ V2` closing present triangles with `w`, all edge-disjoint.
fn step4(
    g3: &Graph,
    s: &Red1Sets,
    ledger: &mut ExposureLedger,
    cfg: &Red1Config,
    rng: &mut DfRng,
) -> Result<Vec<Triangle>, ReductionError> {
    let seed = cfg.seed;
    let m1 = g3.mask(&s.v[0]);
    let m2 = g3.mask(&s.v[1]);
    for &w in &s.u[2] {
        let (a, b) = (g3.degree_into(w, &m1), g3.degree_into(w, &m2));
        if a != b {
            return Err(stage_err(
                "step4",
                seed,
                format!("d(w, V1) = {a} ≠ d(w, V2) = {b} at w = {w}"),
            ));
        }
    }
    let mut last = String::new();
    for _ in 0..=cfg.matching_retries {
        let snapshot = ledger.clone();
        let mut g = g3.clone();
        let mut out = Vec::new();
        let mut order = s.u[2].clone();
        order.shuffle(rng);
        let mut ok = true;
        for &w in &order {
            let l: Vec<usize> = g.neighbors(w).iter().copied().filter(|&x| m1[x]).collect();
            let r: Vec<usize> = g.neighbors(w).iter().copied().filter(|&x| m2[x]).collect();
            let tri = |a: usize, b: usize| Triangle::in_graph(&g, l[a], r[b], w);
            match triangle_matching(l.len(), r.len(), tri, ledger, rng)
                .map_err(ledger_err("step4", seed))?
            {
                Some(m) => {
                    for t in &m {
                        remove_triangle(&mut g, t);
                    }
                    out.extend(m);
                }
                None => {
                    last = format!(
                        "no perfect matching for apex {w} on {} + {}",
                        l.len(),
                        r.len()
                    );
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
fn check_red1(base: &Graph, h: &Graph, ts: &[Triangle], s: &Red1Sets) -> Result<(), String> {
    if h.edge_count() + 3 * ts.len() != base.edge_count() {
        return Err(format!(
            "e(H) + 3|T| = {} + {} ≠ e(G) = {}",
            h.edge_count(),
            3 * ts.len(),
            base.edge_count()
        ));
    }
    for (i, part) in s.v.iter().enumerate() {
        if let Some(&(a, b)) = h.induced_edges(part).first() {
            return Err(format!("H has edge {a}-{b} inside V{}", i + 1));
        }
    }
    if let Some(&w) = s.w3.iter().find(|&&w| h.degree(w) > 0) {
        return Err(format!("d_H({w}) = {} on W3", h.degree(w)));
    }
    let want = s.v[2].len() - s.w3.len();
    let m3 = h.mask(&s.v[2]);
    for &x in s.v[0].iter().chain(&s.v[1]) {
        let d = h.degree(x) - h.degree_into(x, &m3);
        if d != want {
            return Err(format!("d_H[V1 ∪ V2]({x}) = {d}, want {want}"));
        }
    }
    Ok(())
}
