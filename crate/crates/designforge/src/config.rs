//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{key}`: cannot parse `{value}`")]
    Value { key: String, value: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Subcommand {
    Threshold,
    Spreadness,
    Sts,
    Onef,
    Latin,
    Nibble,
    Klist,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Threshold => "threshold",
            Subcommand::Spreadness => "spreadness",
            Subcommand::Sts => "sts",
            Subcommand::Onef => "onef",
            Subcommand::Latin => "latin",
            Subcommand::Nibble => "nibble",
            Subcommand::Klist => "klist",
        }
    }
}

/// What a `threshold` sweep measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// `solve_list_edge_colouring` on `K_{n,n}` with binomial lists.
    Ls,
    Sts,
    Onef,
}

impl FromStr for Target {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "ls" | "latin" => Ok(Target::Ls),
            "sts" => Ok(Target::Sts),
            "onef" => Ok(Target::Onef),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub subcommand: Subcommand,
    pub n: Vec<usize>,
    pub p: Vec<f64>,
    /// List sizes for `klist`.
    pub k: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub out: PathBuf,
    #[serde(rename = "C")]
    pub c: f64,
    pub eps: f64,
    pub delta: f64,
    pub gamma: f64,
    pub eps2: f64,
    pub eps3: f64,
    pub target: Target,
    /// Single-edge and two-edge probe counts for `spreadness`.
    pub probes: usize,
    pub pair_probes: usize,
    pub restarts: usize,
    pub backtracks: usize,
    /// Record wall-clock times; off keeps artifacts byte-identical.
    pub timing: bool,
}

const KEYS: &[&str] = &[
    "subcommand", "n", "p", "k", "trials", "seed", "out", "C", "eps", "delta", "gamma", "eps2", "eps3",
    "target", "probes", "pair_probes", "restarts", "backtracks", "timing",
];

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(ConfigError::Syntax { line: i + 1 });
        }
        if !KEYS.contains(&k) {
            return Err(ConfigError::UnknownKey(k.into()));
        }
        out.insert(k.to_string(), v.to_string());
    }
    Ok(out)
}

fn one<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| ConfigError::Value {
        key: key.into(),
        value: v.into(),
    })
}

fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>, ConfigError> {
    v.split(',').map(|x| one(key, x.trim())).collect()
}

impl ExperimentConfig {
    pub fn defaults(sub: Subcommand) -> Self {
        let (n, p, trials) = match sub {
            Subcommand::Threshold => (16, (1..=10).map(|i| i as f64 / 10.0).collect(), 50),
            Subcommand::Spreadness => (64, vec![1.0], 10_000),
            Subcommand::Sts => (99, vec![1.0], 1),
            Subcommand::Onef => (32, vec![1.0], 1),
            Subcommand::Latin => (8, vec![0.8], 1),
            Subcommand::Nibble => (151, vec![1.0], 1),
            Subcommand::Klist => (16, vec![1.0], 50),
        };
        ExperimentConfig {
            subcommand: sub,
            n: vec![n],
            p,
            k: vec![4, 8, 12, 16],
            trials,
            seed: 0,
            out: PathBuf::from("out"),
            c: 12.0,
            eps: 0.12,
            delta: 0.3,
            gamma: 0.1,
            eps2: 0.02,
            eps3: 0.5,
            target: Target::Ls,
            probes: 50,
            pair_probes: 20,
            restarts: 200,
            backtracks: 64,
            timing: false,
        }
    }

    /// Defaults for `sub`, then `pairs` on top.
    pub fn from_pairs(sub: Subcommand, pairs: &BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let mut c = ExperimentConfig::defaults(sub);
        for (k, v) in pairs {
            match k.as_str() {
                "subcommand" => {
                    if v != sub.name() {
                        return Err(ConfigError::Invalid(format!("config is for `{v}`, ran `{}`", sub.name())));
                    }
                }
                "n" => c.n = list(k, v)?,
                "p" => c.p = list(k, v)?,
                "k" => c.k = list(k, v)?,
                "trials" => c.trials = one(k, v)?,
                "seed" => c.seed = one(k, v)?,
                "out" => c.out = PathBuf::from(v),
                "C" => c.c = one(k, v)?,
                "eps" => c.eps = one(k, v)?,
                "delta" => c.delta = one(k, v)?,
                "gamma" => c.gamma = one(k, v)?,
                "eps2" => c.eps2 = one(k, v)?,
                "eps3" => c.eps3 = one(k, v)?,
                "target" => c.target = v.parse().map_err(|_| ConfigError::Value { key: k.clone(), value: v.clone() })?,
                "probes" => c.probes = one(k, v)?,
                "pair_probes" => c.pair_probes = one(k, v)?,
                "restarts" => c.restarts = one(k, v)?,
                "backtracks" => c.backtracks = one(k, v)?,
                "timing" => c.timing = one(k, v)?,
                _ => return Err(ConfigError::UnknownKey(k.clone())),
            }
        }
        c.check()?;
        Ok(c)
    }

    fn check(&self) -> Result<(), ConfigError> {
        if self.n.is_empty() || self.p.is_empty() || self.k.is_empty() {
            return Err(ConfigError::Invalid("grids must be non-empty".into()));
        }
        if self.trials == 0 {
            return Err(ConfigError::Invalid("trials must be at least 1".into()));
        }
        if let Some(p) = self.p.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(ConfigError::Invalid(format!("p = {p} outside [0, 1]")));
        }
        if self.c <= 0.0 || self.eps <= 0.0 || self.gamma <= 0.0 {
            return Err(ConfigError::Invalid("C, eps and gamma must be positive".into()));
        }
        Ok(())
    }
}
