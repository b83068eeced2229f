use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypergraph::LinearTripleHypergraph;

/// Smallest `t` with `e^{−εt/2} ≤ 1.01ε`.
pub fn rounds_for(eps: f64) -> usize {
    if eps <= 0.0 || eps >= 1.0 {
        return 0;
    }
    let target = (1.01 * eps).ln();
    let mut t = 0usize;
    while (-eps * t as f64 / 2.0) > target {
        t += 1;
    }
    t
}

/// How the bite rate `ε/D_i` picks `D_i` in round `i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BiteRate {
    /// Mean degree of the live vertices that still have an edge.
    Measured,
    /// `D·e^{−2ε(i−1)}`.
    Nominal,
}

/// How `M*` is thinned to `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Thinning {
    /// Delete each edge with probability `γ`.
    Plain,
    /// Delete with the probability that puts the expected uncovered
    /// fraction of `V(H)` at the band centre, then repair out-of-band sets.
    Calibrated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NibbleConfig {
    pub eps: f64,
    pub gamma: f64,
    /// Round count; `None` uses [`rounds_for`].
    pub rounds: Option<usize>,
    pub rate: BiteRate,
    pub thinning: Thinning,
    /// Absolute band slack as a fraction of `|S|`.
    pub band_slack: f64,
    /// Smallest tracked set accepted.
    pub min_set_size: usize,
    /// Abort if the measured bite degree falls below this while live edges remain.
    pub collapse_floor: f64,
    /// Greedy maximal completion of `M*` with the remaining live edges.
    pub complete: bool,
}

impl Default for NibbleConfig {
    fn default() -> Self {
        NibbleConfig {
            eps: 0.1,
            gamma: 0.1,
            rounds: None,
            rate: BiteRate::Measured,
            thinning: Thinning::Calibrated,
            band_slack: 0.02,
            min_set_size: 1,
            collapse_floor: 0.0,
            complete: true,
        }
    }
}

impl NibbleConfig {
    pub fn round_count(&self) -> usize {
        self.rounds.unwrap_or_else(|| rounds_for(self.eps))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetRoundStats {
    /// `|S ∩ V(H)|` before the round.
    pub before: usize,
    /// `|S ∖ V(B)|` among live vertices.
    pub survived: usize,
    /// `|S ∩ V(M)|`.
    pub matched: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NibbleRoundStats {
    pub round: usize,
    pub bite_degree: f64,
    pub bite_prob: f64,
    pub live_before: usize,
    pub live_after: usize,
    pub bite_size: usize,
    pub matching_size: usize,
    pub sets: Vec<SetRoundStats>,
    /// Min, mean and max of `d_{H'}` over surviving vertices.
    pub degree_min: usize,
    pub degree_mean: f64,
    pub degree_max: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NibbleRound {
    pub bite: Vec<usize>,
    pub matching: Vec<usize>,
    /// Live vertices of `H' = H − V(B)`.
    pub alive: Vec<bool>,
    pub stats: NibbleRoundStats,
}

fn live_edge(h: &LinearTripleHypergraph, alive: &[bool], k: usize) -> bool {
    h.edge(k).iter().all(|&v| alive[v])
}

/// Live degree of every vertex (0 for dead ones).
pub fn live_degrees(h: &LinearTripleHypergraph, alive: &[bool]) -> Vec<usize> {
    let mut d = vec![0usize; h.vertex_count()];
    for k in 0..h.edge_count() {
        if live_edge(h, alive, k) {
            for v in h.edge(k) {
                d[v] += 1;
            }
        }
    }
    d
}

/// Mean live degree over live vertices of positive degree.
pub fn measured_degree(h: &LinearTripleHypergraph, alive: &[bool]) -> f64 {
    let d = live_degrees(h, alive);
    let (sum, cnt) = d
        .iter()
        .filter(|&&x| x > 0)
        .fold((0usize, 0usize), |(s, c), &x| (s + x, c + 1));
    if cnt == 0 {
        0.0
    } else {
        sum as f64 / cnt as f64
    }
}

/// One nibble on the live part of `h`: every live edge joins the bite `B`
/// with probability `min(1, ε/D)`, `M` keeps the edges of `B` that meet no
/// other edge of `B`, and `V(B)` is removed.
pub fn nibble_round<R: Rng + ?Sized>(
    h: &LinearTripleHypergraph,
    alive: &[bool],
    d: f64,
    eps: f64,
    family: &[Vec<usize>],
    rng: &mut R,
) -> NibbleRound {
    let prob = if eps <= 0.0 {
        0.0
    } else if d <= 0.0 {
        1.0
    } else {
        (eps / d).min(1.0)
    };
    let mut hits = vec![0u32; h.vertex_count()];
    let mut bite = Vec::new();
    for k in 0..h.edge_count() {
        if live_edge(h, alive, k) && (prob >= 1.0 || rng.gen_bool(prob)) {
            bite.push(k);
            for v in h.edge(k) {
                hits[v] += 1;
            }
        }
    }
    let matching: Vec<usize> = bite
        .iter()
        .copied()
        .filter(|&k| h.edge(k).iter().all(|&v| hits[v] == 1))
        .collect();
    let next: Vec<bool> = alive.iter().zip(&hits).map(|(&a, &c)| a && c == 0).collect();
    let mut in_m = vec![false; h.vertex_count()];
    for &k in &matching {
        for v in h.edge(k) {
            in_m[v] = true;
        }
    }
    let sets = family
        .iter()
        .map(|s| SetRoundStats {
            before: s.iter().filter(|&&v| alive[v]).count(),
            survived: s.iter().filter(|&&v| next[v]).count(),
            matched: s.iter().filter(|&&v| in_m[v]).count(),
        })
        .collect();
    let deg = live_degrees(h, &next);
    let live: Vec<usize> = (0..h.vertex_count()).filter(|&v| next[v]).map(|v| deg[v]).collect();
    let stats = NibbleRoundStats {
        round: 0,
        bite_degree: d,
        bite_prob: prob,
        live_before: alive.iter().filter(|&&a| a).count(),
        live_after: live.len(),
        bite_size: bite.len(),
        matching_size: matching.len(),
        sets,
        degree_min: live.iter().copied().min().unwrap_or(0),
        degree_mean: if live.is_empty() {
            0.0
        } else {
            live.iter().sum::<usize>() as f64 / live.len() as f64
        },
        degree_max: live.iter().copied().max().unwrap_or(0),
    };
    NibbleRound {
        bite,
        matching,
        alive: next,
        stats,
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NibbleError {
    #[error("tracked set {index} has {size} vertices, below the floor {floor}")]
    SetTooSmall { index: usize, size: usize, floor: usize },
    #[error("bite degree {degree:.3} fell below {floor} in round {round}")]
    DegreeCollapse { round: usize, degree: f64, floor: f64 },
    #[error("γ must lie in [0, 1], got {0}")]
    Gamma(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetOutcome {
    pub size: usize,
    /// `|S ∖ V(M)|`.
    pub uncovered: usize,
    pub ratio: f64,
    /// Within `[4γ/5, γ]` widened by the band slack.
    pub in_band: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoMatching {
    pub matching: Vec<usize>,
    pub rounds: Vec<NibbleRoundStats>,
    /// `|M*|` before thinning, and how many came from greedy completion.
    pub m_star: usize,
    pub completed: usize,
    /// `|V(H) ∖ V(M*)| / |V(H)|`.
    pub leftover_fraction: f64,
    pub delete_prob: f64,
    pub repairs: usize,
    pub sets: Vec<SetOutcome>,
}

impl PseudoMatching {
    pub fn band_hit_rate(&self) -> f64 {
        if self.sets.is_empty() {
            return 1.0;
        }
        self.sets.iter().filter(|s| s.in_band).count() as f64 / self.sets.len() as f64
    }
}

fn band(gamma: f64, slack: f64, size: usize) -> (f64, f64) {
    let s = size as f64;
    ((0.8 * gamma - slack) * s, (gamma + slack) * s)
}

/// Matching `M` with `4γ|S|/5 ≤ |S ∖ V(M)| ≤ γ|S|` targeted for every
/// tracked `S`: `t` cascading nibble rounds give `M* = ⋃ M_i`, which is
/// then thinned.
pub fn pseudo_matching<R: Rng + ?Sized>(
    h: &LinearTripleHypergraph,
    d: f64,
    family: &[Vec<usize>],
    cfg: &NibbleConfig,
    rng: &mut R,
) -> Result<PseudoMatching, NibbleError> {
    if !(0.0..=1.0).contains(&cfg.gamma) {
        return Err(NibbleError::Gamma(cfg.gamma));
    }
    for (index, s) in family.iter().enumerate() {
        if s.len() < cfg.min_set_size {
            return Err(NibbleError::SetTooSmall {
                index,
                size: s.len(),
                floor: cfg.min_set_size,
            });
        }
    }
    let nv = h.vertex_count();
    let mut alive = vec![true; nv];
    let mut m_star = Vec::new();
    let mut rounds = Vec::new();
    for i in 0..cfg.round_count() {
        let di = match cfg.rate {
            BiteRate::Measured => measured_degree(h, &alive),
            BiteRate::Nominal => d * (-2.0 * cfg.eps * i as f64).exp(),
        };
        if cfg.rate == BiteRate::Measured && di == 0.0 {
            break;
        }
        if di < cfg.collapse_floor {
            return Err(NibbleError::DegreeCollapse {
                round: i + 1,
                degree: di,
                floor: cfg.collapse_floor,
            });
        }
        let mut r = nibble_round(h, &alive, di, cfg.eps, family, rng);
        r.stats.round = i + 1;
        m_star.extend_from_slice(&r.matching);
        alive = r.alive;
        rounds.push(r.stats);
    }
    let mut completed = 0;
    if cfg.complete {
        let mut used = vec![false; nv];
        for &k in &m_star {
            for v in h.edge(k) {
                used[v] = true;
            }
        }
        let mut rest: Vec<usize> = (0..h.edge_count())
            .filter(|&k| h.edge(k).iter().all(|&v| !used[v]))
            .collect();
        rest.shuffle(rng);
        for k in rest {
            if h.edge(k).iter().all(|&v| !used[v]) {
                for v in h.edge(k) {
                    used[v] = true;
                }
                m_star.push(k);
                completed += 1;
            }
        }
    }
    let covered = 3 * m_star.len();
    let leftover_fraction = if nv == 0 { 0.0 } else { 1.0 - covered as f64 / nv as f64 };
    let delete_prob = match cfg.thinning {
        Thinning::Plain => cfg.gamma,
        Thinning::Calibrated => {
            let target = 0.9 * cfg.gamma;
            if leftover_fraction >= target {
                0.0
            } else {
                (target - leftover_fraction) / (1.0 - leftover_fraction)
            }
        }
    };
    let mut matching: Vec<usize> = m_star
        .iter()
        .copied()
        .filter(|_| !rng.gen_bool(delete_prob.clamp(0.0, 1.0)))
        .collect();
    let repairs = if cfg.thinning == Thinning::Calibrated {
        repair(h, &mut matching, family, cfg, rng)
    } else {
        0
    };
    matching.sort_unstable();
    let sets = outcomes(h, &matching, family, cfg);
    Ok(PseudoMatching {
        matching,
        rounds,
        m_star: m_star.len(),
        completed,
        leftover_fraction,
        delete_prob,
        repairs,
        sets,
    })
}

/// Uncovered counts of each tracked set under `matching`.
pub fn uncovered_counts(h: &LinearTripleHypergraph, matching: &[usize], family: &[Vec<usize>]) -> Vec<usize> {
    let mut covered = vec![false; h.vertex_count()];
    for &k in matching {
        for v in h.edge(k) {
            covered[v] = true;
        }
    }
    family
        .iter()
        .map(|s| s.iter().filter(|&&v| !covered[v]).count())
        .collect()
}

fn outcomes(h: &LinearTripleHypergraph, matching: &[usize], family: &[Vec<usize>], cfg: &NibbleConfig) -> Vec<SetOutcome> {
    uncovered_counts(h, matching, family)
        .into_iter()
        .zip(family)
        .map(|(u, s)| {
            let (lo, hi) = band(cfg.gamma, cfg.band_slack, s.len());
            SetOutcome {
                size: s.len(),
                uncovered: u,
                ratio: if s.is_empty() { 0.0 } else { u as f64 / s.len() as f64 },
                in_band: (u as f64) >= lo - 1e-9 && (u as f64) <= hi + 1e-9,
            }
        })
        .collect()
}

/// Local search on the thinned matching toward the strict band
/// `[4γ/5, γ]·|S|`. Moves: delete a matching edge, add a hyperedge whose
/// vertices are all uncovered, or swap one in for the matching edge
/// covering its single covered vertex. A move is taken only if it lowers
/// the total distance of all tracked sets to their bands.
fn repair<R: Rng + ?Sized>(
    h: &LinearTripleHypergraph,
    matching: &mut Vec<usize>,
    family: &[Vec<usize>],
    cfg: &NibbleConfig,
    rng: &mut R,
) -> usize {
    let nv = h.vertex_count();
    let mut member: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (i, s) in family.iter().enumerate() {
        for &v in s {
            member[v].push(i);
        }
    }
    let mut cover = vec![usize::MAX; nv];
    for &k in matching.iter() {
        for v in h.edge(k) {
            cover[v] = k;
        }
    }
    let bands: Vec<(f64, f64)> = family.iter().map(|s| band(cfg.gamma, 0.0, s.len())).collect();
    let mut unc: Vec<i64> = uncovered_counts(h, matching, family).into_iter().map(|x| x as i64).collect();
    let dist = |j: usize, u: i64| {
        let u = u as f64;
        (bands[j].0 - u).max(0.0) + (u - bands[j].1).max(0.0)
    };
    // Net change of uncovered count per set when `freed` lose cover and `taken` gain it.
    let effect = |freed: &[usize], taken: &[usize]| {
        let mut eff: Vec<(usize, i64)> = Vec::new();
        for (vs, d) in [(freed, 1i64), (taken, -1i64)] {
            for &v in vs {
                for &j in &member[v] {
                    match eff.iter_mut().find(|e| e.0 == j) {
                        Some(e) => e.1 += d,
                        None => eff.push((j, d)),
                    }
                }
            }
        }
        eff
    };
    let mut moves = 0;
    let mut order: Vec<usize> = (0..family.len()).collect();
    for _pass in 0..64 {
        let mut changed = false;
        order.shuffle(rng);
        for &i in &order {
            let mut guard = 0;
            while dist(i, unc[i]) > 0.0 && guard < family[i].len() {
                guard += 1;
                let need_cover = (unc[i] as f64) > bands[i].1;
                let mut best: Option<(f64, Vec<usize>, Vec<usize>, Vec<usize>, Vec<usize>)> = None;
                for &v in &family[i] {
                    let mut cands: Vec<(Vec<usize>, Vec<usize>, Vec<usize>, Vec<usize>)> = Vec::new();
                    if need_cover {
                        if cover[v] != usize::MAX {
                            continue;
                        }
                        for &e in h.incident(v) {
                            let vs = h.edge(e);
                            let covered: Vec<usize> = vs.iter().copied().filter(|&w| cover[w] != usize::MAX).collect();
                            match covered.len() {
                                0 => cands.push((vec![], vs.to_vec(), vec![], vec![e])),
                                1 => {
                                    let f = cover[covered[0]];
                                    let fv = h.edge(f);
                                    let freed: Vec<usize> = fv.iter().copied().filter(|&w| w != covered[0]).collect();
                                    let taken: Vec<usize> = vs.iter().copied().filter(|&w| w != covered[0]).collect();
                                    cands.push((freed, taken, vec![f], vec![e]));
                                }
                                _ => {}
                            }
                        }
                    } else if cover[v] != usize::MAX {
                        let f = cover[v];
                        cands.push((h.edge(f).to_vec(), vec![], vec![f], vec![]));
                    }
                    for (freed, taken, drop, add) in cands {
                        let delta: f64 = effect(&freed, &taken)
                            .iter()
                            .map(|&(j, d)| dist(j, unc[j] + d) - dist(j, unc[j]))
                            .sum();
                        if delta < -1e-9 && best.as_ref().map_or(true, |b| delta < b.0) {
                            best = Some((delta, freed, taken, drop, add));
                        }
                    }
                }
                let Some((_, freed, taken, drop, add)) = best else { break };
                for (j, d) in effect(&freed, &taken) {
                    unc[j] += d;
                }
                for f in drop {
                    for w in h.edge(f) {
                        cover[w] = usize::MAX;
                    }
                    matching.retain(|&k| k != f);
                }
                for e in add {
                    for w in h.edge(e) {
                        cover[w] = e;
                    }
                    matching.push(e);
                }
                moves += 1;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    moves
}
