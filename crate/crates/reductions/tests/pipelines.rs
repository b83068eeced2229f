use std::collections::HashSet;

use designforge_reductions::{
    batch_count, one_f_reduce, sts_reduce, Red1Config, Red2Config, ReductionError, ReductionOutput,
};

/// `T` edge-disjoint, inside `base`, and together with `H` exactly `base`.
fn partitions_base(out: &ReductionOutput, base: &HashSet<(usize, usize)>) {
    let mut seen = HashSet::new();
    for t in &out.triangles {
        for e in t.edges() {
            assert!(base.contains(&e), "{e:?} not in base");
            assert!(seen.insert(e), "{e:?} covered twice");
        }
    }
    for e in out.residual.edges() {
        assert!(base.contains(&e), "{e:?} in H but not in base");
        assert!(!seen.contains(&e), "{e:?} in H and in a triangle");
    }
    assert_eq!(seen.len() + out.residual.edge_count(), base.len());
}

fn degree_into(out: &ReductionOutput, x: usize, set: &[usize]) -> usize {
    set.iter().filter(|&&y| out.residual.has_edge(x, y)).count()
}

#[test]
fn sts_rejects_bad_residue() {
    assert_eq!(
        sts_reduce(8, &Red1Config::default()).unwrap_err(),
        ReductionError::Divisibility { n: 8, rem: 2 }
    );
}

#[test]
fn sts_reduce_at_99_meets_both_conclusions() {
    let n = 99;
    let out = sts_reduce(n, &Red1Config { seed: 1, ..Default::default() }).unwrap();
    let v1 = out.part("V1").unwrap().to_vec();
    let v2 = out.part("V2").unwrap().to_vec();
    let v3 = out.part("V3").unwrap().to_vec();
    let w3 = out.part("W3").unwrap().to_vec();
    assert_eq!((v1.len(), v2.len(), v3.len(), w3.len()), (33, 33, 33, 11));
    let w3s: HashSet<usize> = w3.iter().copied().collect();
    let v3s: HashSet<usize> = v3.iter().copied().collect();
    let mut base = HashSet::new();
    for a in 0..n {
        for b in a + 1..n {
            let cut = (!v3s.contains(&a) && v3s.contains(&b) && !w3s.contains(&b))
                || (!v3s.contains(&b) && v3s.contains(&a) && !w3s.contains(&a));
            if !cut {
                base.insert((a, b));
            }
        }
    }
    partitions_base(&out, &base);
    for &w in &w3 {
        assert_eq!(out.residual.degree(w), 0);
    }
    let both: Vec<usize> = v1.iter().chain(&v2).copied().collect();
    for &x in &both {
        assert_eq!(degree_into(&out, x, &both), v3.len() - w3.len());
    }
    // The step-3 trackers all end at zero.
    let trackers = out.stats.iter().find(|s| s.stage == "step3").unwrap().detail["trackers"].clone();
    for t in trackers.as_array().unwrap() {
        assert!(t["w"].as_array().unwrap().iter().all(|x| x.as_i64() == Some(0)));
    }
}

#[test]
fn sts_at_99_has_no_step1() {
    // 99 ≡ 3 mod 6: no v*, no Step 1 triangles, all parts 2t-regular.
    let out = sts_reduce(99, &Red1Config::default()).unwrap();
    let s1 = out.stats.iter().find(|s| s.stage == "step1").unwrap();
    assert_eq!(s1.triangles, 0);
    assert!(s1.detail["v_star"].is_null());
    assert_eq!((99 / 3 - 1) % 2, 0);
}

#[test]
fn sts_reduce_at_97_uses_v_star() {
    let out = sts_reduce(97, &Red1Config { seed: 2, ..Default::default() }).unwrap();
    let s1 = out.stats.iter().find(|s| s.stage == "step1").unwrap();
    // Perfect matchings of G[V1] and G[V2] (|V1| = |V2| = 32).
    assert_eq!(s1.triangles, 32);
    for &w in out.part("W3").unwrap() {
        assert_eq!(out.residual.degree(w), 0);
    }
}

#[test]
fn batch_count_floor() {
    assert_eq!(batch_count(0.05), Some(160_000));
    assert_eq!(batch_count(0.5), Some(16));
    assert_eq!(batch_count(1.0), Some(1));
    assert_eq!(batch_count(1.2), None);
    assert_eq!(batch_count(0.0), None);
}

#[test]
fn one_f_rejects_large_gamma() {
    let err = one_f_reduce(16, &Red2Config { gamma: 1.5, ..Default::default() }).unwrap_err();
    assert!(matches!(err, ReductionError::Param(_)), "{err}");
}

#[test]
fn one_f_reduce_at_64_meets_both_conclusions() {
    let n = 64;
    let out = one_f_reduce(n, &Red2Config { seed: 3, ..Default::default() }).unwrap();
    let v1 = out.part("V1").unwrap().to_vec();
    let v2 = out.part("V2").unwrap().to_vec();
    let c1 = out.part("C1").unwrap().to_vec();
    let c2 = out.part("C2").unwrap().to_vec();
    let c2p = out.part("C2'").unwrap().to_vec();
    assert_eq!((v1.len(), v2.len(), c1.len(), c2.len(), c2p.len()), (64, 64, 63, 64, 7));
    let mut base = HashSet::new();
    for x in 0..2 * n {
        for y in x + 1..4 * n - 1 {
            base.insert((x, y));
        }
    }
    partitions_base(&out, &base);
    for &c in c1.iter().chain(&c2p) {
        assert_eq!(out.residual.degree(c), 0);
    }
    let both: Vec<usize> = v1.iter().chain(&v2).copied().collect();
    for &x in &both {
        assert_eq!(degree_into(&out, x, &both), c2.len() - c2p.len());
    }
    for &x in &v1 {
        assert_eq!(degree_into(&out, x, &v1), 0);
    }
    let json: serde_json::Value = serde_json::from_str(&out.to_json().unwrap()).unwrap();
    assert_eq!(json["triangles"].as_array().unwrap().len(), out.triangles.len());
    assert_eq!(json["residual_edges"].as_array().unwrap().len(), out.residual.edge_count());
    let trace = out.trace_jsonl().unwrap();
    let stages: Vec<String> = trace
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["stage"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(stages, ["setup", "step1", "step2", "step3", "step4"]);
}

#[test]
fn one_f_reduce_with_batches_reports_windows() {
    // K = 3 at n = 64 usually fails in Step 3; Step 1's windows must be
    // reported either way, so only check the error is staged.
    match one_f_reduce(64, &Red2Config { max_batches: 3, ..Default::default() }) {
        Ok(out) => assert!(out.stats[1].detail["windows"]["w_size_in_window"].is_number()),
        Err(e) => assert!(matches!(e, ReductionError::Stage { .. }), "{e}"),
    }
}
