//! Seeded experiment harness: threshold sweeps, spreadness reports,
//! end-to-end builds and nibble diagnostics. Every artifact is a function
//! of the configuration and its master seed.

pub mod config;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use designforge_graph::{
    enumerate_triangles, named_stream, rng_from_seed, substream, validate_latin_square, validate_sts,
    BipartiteGraph, Graph, ListMode,
};
use designforge_nibble::{pseudo_matching, NibbleConfig, TriangleHypergraph};
use designforge_reductions::{Red1Config, Red2Config};
use designforge_solvers::{
    build_one_factorization_k2n, build_sts, complete_bipartite, latin_square_from_lists, random_latin_lists,
    solve_list_edge_colouring, BuildError, OneFConfig, SolveBudget, StsConfig,
};
use designforge_spread::{estimate_spreadness, wilson, Probe, ProbeSet, ProbeTarget, SpreadConfig};
use designforge_vortex::{indices, vortex_params};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

pub use config::{parse_pairs, ConfigError, ExperimentConfig, Subcommand, Target};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("build failed: {0}")]
    Build(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Build(_) => 3,
            RunError::Validation(_) => 4,
            RunError::Io { .. } => 1,
        }
    }
}

impl From<BuildError> for RunError {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::Param(m) => RunError::Config(ConfigError::Invalid(m)),
            BuildError::Validation { .. } => RunError::Validation(e.to_string()),
            BuildError::Stage { .. } => RunError::Build(e.to_string()),
        }
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, RunError> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RunError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(io_err(&path))?;
    Ok(path)
}

fn pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// One row of a success-rate sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    /// `p` for binomial lists, `k` for uniform ones.
    pub x: f64,
    pub trials: usize,
    pub successes: usize,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub mean_time_ms: f64,
    /// Trials whose lists had an empty entry (list targets only).
    pub empty_list_trials: usize,
    pub infeasible: usize,
    pub exhausted: usize,
}

impl SweepRow {
    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

#[derive(Default)]
struct Trial {
    success: bool,
    empty: bool,
    infeasible: bool,
    exhausted: bool,
    ms: f64,
}

fn budget(cfg: &ExperimentConfig) -> SolveBudget {
    SolveBudget {
        restarts: cfg.restarts,
        backtracks: cfg.backtracks,
        ..SolveBudget::default()
    }
}

fn list_trial(n: usize, mode: ListMode, seed: u64, budget: &SolveBudget) -> Trial {
    let g = complete_bipartite(n);
    let lists = match designforge_graph::sample_lists(&g.edges(), mode, n, &mut rng_from_seed(named_stream(seed, "lists"))) {
        Ok(l) => l,
        Err(_) => return Trial::default(),
    };
    let r = solve_list_edge_colouring(&g, &lists, budget, &mut rng_from_seed(named_stream(seed, "solve")))
        .expect("K_{n,n} with n colours is a valid instance");
    Trial {
        success: r.is_success(),
        empty: lists.empty_edge().is_some(),
        infeasible: r.status() == "infeasible",
        exhausted: r.status() == "exhausted",
        ms: 0.0,
    }
}

fn sts_config(cfg: &ExperimentConfig, p: f64, seed: u64) -> StsConfig {
    StsConfig {
        eps: cfg.eps,
        p,
        c: cfg.c,
        seed,
        red1: Red1Config {
            eps2: cfg.eps2,
            ..Red1Config::default()
        },
        budget: budget(cfg),
        ..StsConfig::default()
    }
}

fn onef_config(cfg: &ExperimentConfig, p: f64, seed: u64) -> OneFConfig {
    OneFConfig {
        eps: cfg.eps,
        p,
        c: cfg.c,
        seed,
        red2: Red2Config {
            gamma: cfg.gamma,
            ..Red2Config::default()
        },
        budget: budget(cfg),
    }
}

fn row(n: usize, x: f64, trials: Vec<Trial>, timing: bool) -> SweepRow {
    let t = trials.len();
    let successes = trials.iter().filter(|r| r.success).count();
    let (wilson_lo, wilson_hi) = wilson(successes, t, 1.96);
    SweepRow {
        n,
        x,
        trials: t,
        successes,
        wilson_lo,
        wilson_hi,
        mean_time_ms: if timing { trials.iter().map(|r| r.ms).sum::<f64>() / t as f64 } else { 0.0 },
        empty_list_trials: trials.iter().filter(|r| r.empty).count(),
        infeasible: trials.iter().filter(|r| r.infeasible).count(),
        exhausted: trials.iter().filter(|r| r.exhausted).count(),
    }
}

/// Runs `trials` per point; trial `t` uses `substream(seed, t)` at every
/// point, so binomial lists grow monotonically with `p`.
fn sweep(cfg: &ExperimentConfig, xs: &[f64], one: impl Fn(usize, f64, u64) -> Trial + Sync) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for &n in &cfg.n {
        for &x in xs {
            let trials: Vec<Trial> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let start = Instant::now();
                    let mut r = one(n, x, substream(cfg.seed, t as u64));
                    r.ms = start.elapsed().as_secs_f64() * 1000.0;
                    r
                })
                .collect();
            rows.push(row(n, x, trials, cfg.timing));
        }
    }
    rows
}

/// Success rate against `p` for the configured target.
pub fn threshold_sweep(cfg: &ExperimentConfig) -> Vec<SweepRow> {
    let b = budget(cfg);
    sweep(cfg, &cfg.p, |n, p, seed| match cfg.target {
        Target::Ls => list_trial(n, ListMode::Binomial(p), seed, &b),
        Target::Sts => Trial {
            success: build_sts(n, &sts_config(cfg, p, seed)).is_ok(),
            ..Trial::default()
        },
        Target::Onef => Trial {
            success: build_one_factorization_k2n(n, &onef_config(cfg, p, seed)).is_ok(),
            ..Trial::default()
        },
    })
}

/// Success rate against the list size `k` with uniform `k`-lists on `K_{n,n}`.
pub fn klist_sweep(cfg: &ExperimentConfig) -> Vec<SweepRow> {
    let b = budget(cfg);
    let ks: Vec<f64> = cfg.k.iter().map(|&k| k as f64).collect();
    sweep(cfg, &ks, |n, k, seed| list_trial(n, ListMode::Uniform(k as usize), seed, &b))
}

pub fn sweep_csv(rows: &[SweepRow], x_name: &str) -> String {
    let mut s = format!("n,{x_name},trials,successes,wilson_lo,wilson_hi,mean_time_ms\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{:.6},{:.6},{:.3}\n",
            r.n, r.x, r.trials, r.successes, r.wilson_lo, r.wilson_hi, r.mean_time_ms
        ));
    }
    s
}

/// Random single-edge and two-edge part probes on `K_{n,n}`.
pub fn random_probes(n: usize, c: f64, singles: usize, pairs: usize, seed: u64) -> Vec<Probe> {
    let ell = vortex_params(n.max(4), c).map(|v| v.ell).unwrap_or(1);
    let idx = indices(ell);
    let mut rng = rng_from_seed(named_stream(seed, "probes"));
    let set = |rng: &mut designforge_graph::DfRng| {
        let (i, j) = idx[rng.gen_range(0..idx.len())];
        ProbeSet {
            target: ProbeTarget::Part { i, j },
            edges: vec![(rng.gen_range(0..n), rng.gen_range(0..n))],
        }
    };
    let mut out: Vec<Probe> = (0..singles).map(|_| Probe { sets: vec![set(&mut rng)] }).collect();
    for _ in 0..pairs {
        let a = set(&mut rng);
        let b = loop {
            let b = set(&mut rng);
            if b.edges != a.edges {
                break b;
            }
        };
        out.push(Probe { sets: vec![a, b] });
    }
    out
}

/// Runs one subcommand and writes its artifacts under `cfg.out`.
/// Zeroes every `time_ms` field unless timing was asked for.
fn untimed(v: &mut Value, timing: bool) {
    if timing {
        return;
    }
    match v {
        Value::Object(m) => {
            for (k, x) in m.iter_mut() {
                if k == "time_ms" {
                    *x = json!(0);
                } else {
                    untimed(x, false);
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(|x| untimed(x, false)),
        _ => {}
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>, RunError> {
    let out = &cfg.out;
    let mut written = vec![write(out, "config.json", &pretty(cfg))?];
    match cfg.subcommand {
        Subcommand::Threshold => {
            let rows = threshold_sweep(cfg);
            written.push(write(out, "threshold.csv", &sweep_csv(&rows, "p"))?);
            written.push(write(out, "threshold.json", &pretty(&rows))?);
        }
        Subcommand::Klist => {
            let rows = klist_sweep(cfg);
            written.push(write(out, "klist.csv", &sweep_csv(&rows, "k"))?);
            written.push(write(out, "klist.json", &pretty(&rows))?);
        }
        Subcommand::Spreadness => {
            let n = cfg.n[0];
            let g = BipartiteGraph::complete(n, n);
            let scfg = SpreadConfig {
                c: cfg.c,
                ..SpreadConfig::default()
            };
            let probes = random_probes(n, cfg.c, cfg.probes, cfg.pair_probes, cfg.seed);
            let report = estimate_spreadness(&g, &scfg, &probes, cfg.trials, cfg.seed);
            written.push(write(out, "spreadness.json", &pretty(&report))?);
            if let Some(bad) = report.probes.iter().position(|p| !p.pass) {
                return Err(RunError::Validation(format!("probe {bad} exceeds its bound")));
            }
        }
        Subcommand::Sts => {
            let n = cfg.n[0];
            let b = build_sts(n, &sts_config(cfg, cfg.p[0], cfg.seed))?;
            let report = validate_sts(n, &b.triples);
            let mut doc = json!({ "build": b, "validation": report });
            untimed(&mut doc, cfg.timing);
            written.push(write(out, "sts.json", &pretty(&doc))?);
            if !report.valid {
                return Err(RunError::Validation(format!("{} violations", report.violations.len())));
            }
        }
        Subcommand::Onef => {
            let n = cfg.n[0];
            let b = build_one_factorization_k2n(n, &onef_config(cfg, cfg.p[0], cfg.seed))?;
            let report =
                designforge_graph::validate_proper_edge_colouring(&b.edges, &b.colours, 2 * n - 1, None);
            let mut doc = json!({
                "n": n,
                "seed": b.seed,
                "matchings": b.classes(),
                "stages": b.stages,
                "validation": report,
            });
            untimed(&mut doc, cfg.timing);
            written.push(write(out, "onef.json", &pretty(&doc))?);
            if !report.valid {
                return Err(RunError::Validation(format!("{} violations", report.violations.len())));
            }
        }
        Subcommand::Latin => {
            let n = cfg.n[0];
            let mut rng = rng_from_seed(named_stream(cfg.seed, "latin"));
            let lists = random_latin_lists(n, ListMode::Binomial(cfg.p[0]), &mut rng)
                .map_err(|e| RunError::Config(ConfigError::Invalid(e.to_string())))?;
            let r = latin_square_from_lists(n, &lists, &budget(cfg), &mut rng)
                .map_err(|e| RunError::Build(e.to_string()))?;
            let report = r.square.as_ref().map(|sq| validate_latin_square(sq));
            let mut result = r.result.to_json();
            if !cfg.timing {
                result["stats"]["time_ms"] = json!(0);
            }
            let doc = json!({
                "n": n,
                "p": cfg.p[0],
                "seed": cfg.seed,
                "mean_list_len": lists.mean_len(),
                "square": r.square,
                "result": result,
                "validation": report,
            });
            written.push(write(out, "latin.json", &pretty(&doc))?);
            match report {
                None => return Err(RunError::Build(format!("list colouring {} (seed {})", r.result.status(), cfg.seed))),
                Some(rep) if !rep.valid => return Err(RunError::Validation("Latin square invalid".into())),
                Some(_) => {}
            }
        }
        Subcommand::Nibble => {
            let n = cfg.n[0];
            let g = Graph::complete(n);
            let aux = TriangleHypergraph::new(&g, enumerate_triangles(&g, None));
            let mut family: Vec<Vec<usize>> = (0..n).map(|v| aux.star(v)).collect();
            family.push((0..aux.hypergraph.vertex_count()).collect());
            let ncfg = NibbleConfig {
                eps: cfg.eps,
                gamma: cfg.gamma,
                ..NibbleConfig::default()
            };
            let d = n.saturating_sub(2) as f64;
            let pm = pseudo_matching(&aux.hypergraph, d, &family, &ncfg, &mut rng_from_seed(named_stream(cfg.seed, "nibble")))
                .map_err(|e| RunError::Build(e.to_string()))?;
            let mut lines = String::new();
            for r in &pm.rounds {
                lines.push_str(&serde_json::to_string(r).expect("serializable"));
                lines.push('\n');
            }
            written.push(write(out, "nibble.jsonl", &lines)?);
            let summary = json!({
                "n": n,
                "eps": cfg.eps,
                "gamma": cfg.gamma,
                "rounds": pm.rounds.len(),
                "m_star": pm.m_star,
                "completed": pm.completed,
                "matching": pm.matching.len(),
                "leftover_fraction": pm.leftover_fraction,
                "band_hit_rate": pm.band_hit_rate(),
            });
            written.push(write(out, "nibble.json", &pretty(&summary))?);
        }
    }
    Ok(written)
}
