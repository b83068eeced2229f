use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;

use designforge::{parse_pairs, run, ConfigError, ExperimentConfig, RunError, Subcommand, Target};

fn pairs(kv: &[(&str, &str)]) -> BTreeMap<String, String> {
    kv.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_designforge"))
}

#[test]
fn parses_comments_and_lists() {
    let text = "# sweep\nn = 8, 12\np = 0.5,1 # inline\n\ntrials=3\ntarget = sts\n";
    let map = parse_pairs(text).unwrap();
    let cfg = ExperimentConfig::from_pairs(Subcommand::Threshold, &map).unwrap();
    assert_eq!(cfg.n, vec![8, 12]);
    assert_eq!(cfg.p, vec![0.5, 1.0]);
    assert_eq!(cfg.trials, 3);
    assert_eq!(cfg.target, Target::Sts);
    assert_eq!(cfg.c, 12.0);
}

#[test]
fn rejects_bad_configs() {
    assert_eq!(parse_pairs("n 8"), Err(ConfigError::Syntax { line: 1 }));
    assert_eq!(parse_pairs("x\n= 3"), Err(ConfigError::Syntax { line: 1 }));
    assert_eq!(parse_pairs("colour = 3"), Err(ConfigError::UnknownKey("colour".into())));
    let bad = |kv: &[(&str, &str)]| ExperimentConfig::from_pairs(Subcommand::Threshold, &pairs(kv)).unwrap_err();
    assert!(matches!(bad(&[("n", "eight")]), ConfigError::Value { .. }));
    assert!(matches!(bad(&[("target", "graph")]), ConfigError::Value { .. }));
    assert!(matches!(bad(&[("p", "1.5")]), ConfigError::Invalid(_)));
    assert!(matches!(bad(&[("trials", "0")]), ConfigError::Invalid(_)));
    assert!(matches!(bad(&[("C", "-1")]), ConfigError::Invalid(_)));
    assert!(matches!(bad(&[("subcommand", "sts")]), ConfigError::Invalid(_)));
}

fn read_all(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn replay(sub: Subcommand, kv: &[(&str, &str)]) {
    let d = tempfile::tempdir().unwrap();
    let mut map = pairs(kv);
    map.insert("out".into(), d.path().display().to_string());
    let cfg = ExperimentConfig::from_pairs(sub, &map).unwrap();
    run(&cfg).unwrap();
    let first = read_all(d.path());
    for f in first.keys() {
        fs::remove_file(d.path().join(f)).unwrap();
    }
    run(&cfg).unwrap();
    let second = read_all(d.path());
    assert!(!first.is_empty());
    assert_eq!(first.keys().collect::<Vec<_>>(), second.keys().collect::<Vec<_>>());
    for (name, bytes) in &first {
        assert!(bytes == &second[name], "{}: {name} differs between runs", sub.name());
    }
}

#[test]
fn same_seed_same_bytes() {
    replay(Subcommand::Threshold, &[("n", "6"), ("p", "0.6,1"), ("trials", "8"), ("seed", "3")]);
    replay(Subcommand::Klist, &[("n", "6"), ("k", "3,6"), ("trials", "6"), ("seed", "1")]);
    replay(Subcommand::Sts, &[("n", "15"), ("seed", "2")]);
    replay(Subcommand::Onef, &[("n", "32"), ("seed", "2")]);
    replay(Subcommand::Latin, &[("n", "6"), ("p", "1"), ("seed", "5")]);
    replay(Subcommand::Spreadness, &[("n", "16"), ("trials", "40"), ("probes", "4"), ("pair_probes", "2")]);
    replay(Subcommand::Nibble, &[("n", "21"), ("seed", "7")]);
}

#[test]
fn threshold_endpoints() {
    let d = tempfile::tempdir().unwrap();
    let map = pairs(&[("n", "5"), ("p", "0,1"), ("trials", "10"), ("out", &d.path().display().to_string())]);
    run(&ExperimentConfig::from_pairs(Subcommand::Threshold, &map).unwrap()).unwrap();
    let csv = fs::read_to_string(d.path().join("threshold.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,p,trials,successes,wilson_lo,wilson_hi,mean_time_ms");
    let successes: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(successes, ["0", "10"]);
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().display().to_string();

    let ok = bin().args(["sts", "--n", "7", "--out", &out]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("sts.json"));

    let bad_cfg = bin().args(["threshold", "--p", "2", "--out", &out]).output().unwrap();
    assert_eq!(bad_cfg.status.code(), Some(2));

    let cfg_path = d.path().join("x.cfg");
    fs::write(&cfg_path, "mystery = 1\n").unwrap();
    let unknown = bin().args(["sts", "--config"]).arg(&cfg_path).output().unwrap();
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("mystery"));

    // No triangles survive at p = 0.
    let build = bin().args(["sts", "--n", "7", "--p", "0", "--out", &out]).output().unwrap();
    assert_eq!(build.status.code(), Some(3));

    assert_eq!(RunError::Validation("x".into()).exit_code(), 4);
}
