use designforge_graph::{named_stream, rng_from_seed, substream, BipartiteGraph, OneFactorization};
use designforge_matching::{one_factorize, FactorizeError};
use designforge_vortex::{indices, random_vortex, vortex_params, VortexDecomposition, VortexError, DEFAULT_C};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decompose::{decompose_seeded, decompose_with_labels, DecomposeConfig, DecomposeError, RegularDecomposition};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadConfig {
    pub c: f64,
    /// Overrides the level count from [`vortex_params`].
    pub ell: Option<u32>,
    pub stage_retries: u32,
    pub sample_retries: u32,
    /// Skip the 1-factorization step (decomposition only).
    pub factorize: bool,
}

impl Default for SpreadConfig {
    fn default() -> Self {
        SpreadConfig {
            c: DEFAULT_C,
            ell: None,
            stage_retries: 5,
            sample_retries: 5,
            factorize: true,
        }
    }
}

/// Everything needed to replay one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadTrace {
    pub seed: u64,
    pub n: usize,
    pub c: f64,
    pub ell: u32,
    /// `2^{−ℓ}`.
    pub p: f64,
    pub degenerate: bool,
    /// `X_{e,0}` in canonical edge order.
    pub labels: Vec<u32>,
    /// `X_{e,i}` for the level `i` of each edge (0 on the top level).
    pub xi: Vec<u32>,
    /// Failed cover-down attempts per level, for the accepted attempt.
    pub stage_retries: Vec<u32>,
    /// Whole-sample restarts before the accepted attempt.
    pub sample_retries: u32,
    pub factorize_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpreadSample {
    pub factorization: OneFactorization,
    /// `(i, j, k)` of each matching.
    pub index: Vec<(u32, u32, u32)>,
    pub decomposition: RegularDecomposition,
    pub vortex: VortexDecomposition,
    pub trace: SpreadTrace,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpreadError {
    #[error("host must be regular with equal sides")]
    NotRegular,
    #[error(transparent)]
    Vortex(#[from] VortexError),
    #[error(transparent)]
    Factorize(#[from] FactorizeError),
    #[error("all {attempts} sample attempts failed; last: {last}")]
    Exhausted { attempts: u32, last: DecomposeError },
}

/// Spread random 1-factorization of a regular bipartite `g`: random vortex,
/// cover-down into regular parts, then a 1-factorization of each part in
/// `(i, j, k)` order.
pub fn sample_spread_factorization<R: Rng + ?Sized>(
    g: &BipartiteGraph,
    c: f64,
    rng: &mut R,
) -> Result<SpreadSample, SpreadError> {
    let cfg = SpreadConfig {
        c,
        ..SpreadConfig::default()
    };
    sample_with_seed(g, &cfg, rng.gen())
}

pub fn sample_with_seed(g: &BipartiteGraph, cfg: &SpreadConfig, seed: u64) -> Result<SpreadSample, SpreadError> {
    let n = g.left_count();
    if n != g.right_count() || g.is_regular().is_none() {
        return Err(SpreadError::NotRegular);
    }
    let vp = vortex_params(n.max(4), cfg.c)?;
    let ell = cfg.ell.unwrap_or(vp.ell);
    let dcfg = DecomposeConfig {
        stage_retries: cfg.stage_retries,
    };
    let mut last = None;
    for attempt in 0..=cfg.sample_retries {
        let s = substream(seed, u64::from(attempt));
        let mut vrng = rng_from_seed(named_stream(s, "vortex"));
        let vortex = random_vortex(g, ell, &mut vrng)?;
        match decompose_seeded(g, &vortex, &dcfg, named_stream(s, "cover-down")) {
            Ok((decomposition, dtrace)) => {
                let trace = SpreadTrace {
                    seed,
                    n,
                    c: cfg.c,
                    ell,
                    p: 0.5f64.powi(ell as i32),
                    degenerate: vp.degenerate && cfg.ell.is_none(),
                    labels: vortex.labels.clone(),
                    xi: dtrace.xi,
                    stage_retries: dtrace.retries,
                    sample_retries: attempt,
                    factorize_seed: named_stream(s, "factorize"),
                };
                let (factorization, index) = if cfg.factorize {
                    factorize_parts(&decomposition, trace.factorize_seed)?
                } else {
                    (Vec::new(), Vec::new())
                };
                return Ok(SpreadSample {
                    factorization,
                    index,
                    decomposition,
                    vortex,
                    trace,
                });
            }
            Err(e) => last = Some(e),
        }
    }
    Err(SpreadError::Exhausted {
        attempts: cfg.sample_retries + 1,
        last: last.expect("at least one attempt"),
    })
}

/// 1-factorizes every part in canonical `(i, j)` order.
pub fn factorize_parts(
    dec: &RegularDecomposition,
    seed: u64,
) -> Result<(OneFactorization, Vec<(u32, u32, u32)>), FactorizeError> {
    let mut rng = rng_from_seed(seed);
    let mut all = Vec::new();
    let mut index = Vec::new();
    for (i, j) in indices(dec.ell) {
        if dec.degree(i, j) == 0 {
            continue;
        }
        for (k, m) in one_factorize(&dec.part(i, j), &mut rng)?.into_iter().enumerate() {
            all.push(m);
            index.push((i, j, k as u32 + 1));
        }
    }
    Ok((all, index))
}

/// Rebuilds the decomposition and factorization from a trace alone.
pub fn replay(g: &BipartiteGraph, trace: &SpreadTrace) -> Result<(RegularDecomposition, OneFactorization), SpreadError> {
    let vortex = VortexDecomposition::from_labels(g, trace.ell, trace.labels.clone())?;
    let dec = decompose_with_labels(g, &vortex, &trace.xi).map_err(|last| SpreadError::Exhausted { attempts: 1, last })?;
    let (f, _) = factorize_parts(&dec, trace.factorize_seed)?;
    Ok((dec, f))
}
