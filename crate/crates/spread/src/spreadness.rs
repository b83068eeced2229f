use designforge_graph::{substream, BipartiteGraph};
use designforge_vortex::vortex_params;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::sampler::{sample_with_seed, SpreadConfig, SpreadSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbeTarget {
    /// `S ⊆ E(R_{i,j})`.
    Part { i: u32, j: u32 },
    /// `S ⊆ M_{i,j,k}`.
    Matching { i: u32, j: u32, k: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSet {
    pub target: ProbeTarget,
    pub edges: Vec<(usize, usize)>,
}

/// Joint event that every set lands in its target.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub sets: Vec<ProbeSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub indices: Vec<ProbeTarget>,
    pub sizes: Vec<usize>,
    pub hits: usize,
    pub trials: usize,
    pub empirical: f64,
    /// 95% Wilson interval.
    pub ci: (f64, f64),
    /// Half-width of the one-sigma Wilson interval.
    pub sigma: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadnessReport {
    pub n: usize,
    #[serde(rename = "C")]
    pub c: f64,
    pub ell: u32,
    pub p: f64,
    /// `8C ln n / n`.
    pub q_bound: f64,
    pub probes: Vec<ProbeResult>,
    pub samples: usize,
    pub failures: usize,
    /// Mean restarts plus stage retries per successful sample.
    pub retry_rate: f64,
}

/// Wilson score interval for `hits / n` at `z` standard deviations.
pub fn wilson(hits: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let ph = hits as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (ph + z2 / (2.0 * nf)) / denom;
    let half = z * (ph * (1.0 - ph) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

fn holds(sample: &SpreadSample, probe: &Probe) -> bool {
    probe.sets.iter().all(|set| match set.target {
        ProbeTarget::Part { i, j } => {
            let want = designforge_vortex::label_of(sample.decomposition.ell, i, j);
            set.edges.iter().all(|&(a, b)| {
                sample
                    .decomposition
                    .edge_index(a, b)
                    .is_some_and(|k| sample.decomposition.part[k] == want)
            })
        }
        ProbeTarget::Matching { i, j, k } => sample
            .index
            .iter()
            .position(|&x| x == (i, j, k))
            .is_some_and(|pos| set.edges.iter().all(|e| sample.factorization[pos].contains(e))),
    })
}

/// Per-edge bound: `4p` for part targets, `q = 8C ln n / n` for matchings.
fn bound(probe: &Probe, p: f64, q: f64) -> f64 {
    probe
        .sets
        .iter()
        .map(|s| {
            let b = match s.target {
                ProbeTarget::Part { .. } => 4.0 * p,
                ProbeTarget::Matching { .. } => q,
            };
            b.min(1.0).powi(s.edges.len() as i32)
        })
        .product()
}

/// Runs `trials` independent samples (substreams of `seed`) and compares
/// each probe frequency against its bound; a probe passes when the
/// frequency is at most `bound + 3σ`.
pub fn estimate_spreadness(
    g: &BipartiteGraph,
    cfg: &SpreadConfig,
    probes: &[Probe],
    trials: usize,
    seed: u64,
) -> SpreadnessReport {
    let n = g.left_count();
    let vp = vortex_params(n.max(4), cfg.c).ok();
    let ell = cfg.ell.or(vp.map(|v| v.ell)).unwrap_or(1);
    let p = 0.5f64.powi(ell as i32);
    let q = 8.0 * cfg.c * (n.max(2) as f64).ln() / n.max(1) as f64;
    let needs_matchings = probes
        .iter()
        .flat_map(|pr| &pr.sets)
        .any(|s| matches!(s.target, ProbeTarget::Matching { .. }));
    let run_cfg = SpreadConfig {
        factorize: cfg.factorize && needs_matchings,
        ..cfg.clone()
    };
    let outcomes: Vec<Option<(Vec<bool>, u32)>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = sample_with_seed(g, &run_cfg, substream(seed, t as u64)).ok()?;
            let retries = s.trace.sample_retries + s.trace.stage_retries.iter().sum::<u32>();
            Some((probes.iter().map(|pr| holds(&s, pr)).collect(), retries))
        })
        .collect();
    let ok: Vec<&(Vec<bool>, u32)> = outcomes.iter().flatten().collect();
    let samples = ok.len();
    let retry_rate = if samples == 0 {
        0.0
    } else {
        ok.iter().map(|o| f64::from(o.1)).sum::<f64>() / samples as f64
    };
    let results = probes
        .iter()
        .enumerate()
        .map(|(idx, pr)| {
            let hits = ok.iter().filter(|o| o.0[idx]).count();
            let empirical = if samples == 0 { 0.0 } else { hits as f64 / samples as f64 };
            let (lo1, hi1) = wilson(hits, samples, 1.0);
            let sigma = (hi1 - lo1) / 2.0;
            let b = bound(pr, p, q);
            ProbeResult {
                indices: pr.sets.iter().map(|s| s.target).collect(),
                sizes: pr.sets.iter().map(|s| s.edges.len()).collect(),
                hits,
                trials: samples,
                empirical,
                ci: wilson(hits, samples, 1.96),
                sigma,
                bound: b,
                pass: samples > 0 && empirical <= b + 3.0 * sigma,
            }
        })
        .collect();
    SpreadnessReport {
        n,
        c: cfg.c,
        ell,
        p,
        q_bound: q,
        probes: results,
        samples,
        failures: trials - samples,
        retry_rate,
    }
}
