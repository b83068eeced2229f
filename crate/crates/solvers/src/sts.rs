use designforge_graph::{named_stream, rng_from_seed, validate_sts, ExposureLedger, Triangle};
use designforge_reductions::{sts_reduce, Red1Config, ReductionError};
use serde::Serialize;
use serde_json::json;

use crate::build::{check_p, list_stage, split_probability, stage_err, BuildError, StageRecord};
use crate::bypass::sts_hill_climb;
use crate::colouring::SolveBudget;

#[derive(Debug, Clone, PartialEq)]
pub struct StsConfig {
    pub eps: f64,
    pub p: f64,
    pub c: f64,
    pub seed: u64,
    /// Below this order the reduction is skipped and `K_n` solved directly.
    pub bypass_below: usize,
    pub bypass_steps: u64,
    /// Remaining reduction settings; `eps`, `p`, `c` and `seed` above win.
    pub red1: Red1Config,
    pub budget: SolveBudget,
}

impl Default for StsConfig {
    fn default() -> Self {
        StsConfig {
            eps: 0.12,
            p: 1.0,
            c: 12.0,
            seed: 0,
            bypass_below: 30,
            bypass_steps: 2_000_000,
            red1: Red1Config::default(),
            budget: SolveBudget::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BuildMode {
    Bypass,
    Pipeline,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StsBuild {
    pub n: usize,
    pub seed: u64,
    pub mode: BuildMode,
    /// Sorted triples, each sorted.
    pub triples: Vec<[usize; 3]>,
    pub stages: Vec<StageRecord>,
}

/// Steiner triple system of order `n` from the present triangles of `K_n`.
///
/// Pipeline mode splits the exposure into two independent ledgers at rate
/// `1 − √(1 − p)` each. The first feeds `sts_reduce`; the second gives the
/// lists on `H[V1, V2]` with colours `V3 ∖ W3`, and the list colouring
/// supplies the triangles covering `H`. Bypass mode runs a hill climb on
/// all of `K_n` at rate `p`. The triples are validated before return.
pub fn build_sts(n: usize, cfg: &StsConfig) -> Result<StsBuild, BuildError> {
    check_p(cfg.p)?;
    if n % 6 != 1 && n % 6 != 3 {
        return Err(BuildError::Param(format!("n = {n} has n mod 6 = {}, need 1 or 3", n % 6)));
    }
    let seed = cfg.seed;
    let (mode, triples, stages) = if n < cfg.bypass_below {
        bypass(n, cfg)?
    } else {
        pipeline(n, cfg)?
    };
    let report = validate_sts(n, &triples);
    if !report.valid {
        return Err(BuildError::Validation {
            seed,
            message: format!("{} violations, first {:?}", report.violations.len(), report.violations.first()),
        });
    }
    Ok(StsBuild {
        n,
        seed,
        mode,
        triples,
        stages,
    })
}

type Parts = (BuildMode, Vec<[usize; 3]>, Vec<StageRecord>);

fn bypass(n: usize, cfg: &StsConfig) -> Result<Parts, BuildError> {
    let seed = cfg.seed;
    let mut ledger = ExposureLedger::new(named_stream(seed, "bypass"), cfg.p).map_err(|e| stage_err("bypass", seed, e))?;
    let universe = (0..n).flat_map(|a| (a + 1..n).flat_map(move |b| (b + 1..n).map(move |c| Triangle::new(a, b, c))));
    ledger
        .register_family("K_n", universe)
        .map_err(|e| stage_err("bypass", seed, e))?;
    let mut rng = rng_from_seed(named_stream(seed, "bypass-search"));
    let triples = sts_hill_climb(n, |t| ledger.expose(t).unwrap_or(false), cfg.bypass_steps, &mut rng)
        .ok_or_else(|| stage_err("bypass", seed, format!("no decomposition within {} steps", cfg.bypass_steps)))?;
    let stages = vec![StageRecord {
        stage: "bypass".into(),
        triangles: triples.len(),
        detail: json!({ "p": cfg.p, "exposed": ledger.universe_size() }),
    }];
    Ok((BuildMode::Bypass, triples, stages))
}

fn pipeline(n: usize, cfg: &StsConfig) -> Result<Parts, BuildError> {
    let seed = cfg.seed;
    let q = split_probability(cfg.p);
    let red = Red1Config {
        eps: cfg.eps,
        p: q,
        c: cfg.c,
        seed,
        ..cfg.red1.clone()
    };
    let out = sts_reduce(n, &red).map_err(|e| match e {
        ReductionError::Divisibility { .. } => BuildError::Param(e.to_string()),
        e => stage_err("reduce", seed, e),
    })?;
    let part = |l: &str| out.part(l).map(<[usize]>::to_vec).ok_or_else(|| stage_err("reduce", seed, format!("missing part {l}")));
    let (v1, v2, v3, w3) = (part("V1")?, part("V2")?, part("V3")?, part("W3")?);
    let colours: Vec<usize> = v3.iter().copied().filter(|x| !w3.contains(x)).collect();
    let ls = list_stage(&out.residual, &v1, &v2, &colours, q, seed, &cfg.budget)?;
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
    let mut triples: Vec<[usize; 3]> = out
        .triangles
        .iter()
        .chain(&ls.triangles)
        .map(Triangle::vertices)
        .collect();
    triples.sort_unstable();
    Ok((BuildMode::Pipeline, triples, stages))
}
