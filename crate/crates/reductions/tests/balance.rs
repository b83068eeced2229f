use std::collections::HashSet;

use designforge_graph::{rng_from_seed, ExposureLedger, Graph, Triangle};
use designforge_reductions::{balance_divisibility, check_divisibility, BalanceConfig, BalanceError};

/// Three parts of size `k`, complete between parts, and inside each part
/// the circulant with the given offsets.
fn instance(k: usize, offsets: &[usize]) -> (Graph, [Vec<usize>; 3]) {
    let us = [0, 1, 2].map(|i| (i * k..(i + 1) * k).collect::<Vec<_>>());
    let mut g = Graph::new(3 * k);
    for i in 0..3 {
        for j in i + 1..3 {
            for &a in &us[i] {
                for &b in &us[j] {
                    g.add_edge(a, b);
                }
            }
        }
        for x in 0..k {
            for &o in offsets {
                g.add_edge(us[i][x], us[i][(x + o) % k]);
            }
        }
    }
    (g, us)
}

fn universe(g: &Graph, us: &[Vec<usize>; 3]) -> Vec<Triangle> {
    let mut out = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                for (a, b) in g.induced_edges(&us[j]) {
                    for &w in &us[i] {
                        out.push(Triangle::new(a, b, w));
                    }
                }
            }
        }
    }
    out
}

fn count_into(g: &Graph, u: usize, set: &[usize]) -> usize {
    set.iter().filter(|&&x| g.has_edge(u, x)).count()
}

#[test]
fn no_inner_edges_means_nothing_to_do() {
    let (g, us) = instance(6, &[]);
    let mut ledger = ExposureLedger::new(0, 1.0).unwrap();
    let b = balance_divisibility(&g, [&us[0], &us[1], &us[2]], &mut ledger, &BalanceConfig::default(), &mut rng_from_seed(0)).unwrap();
    assert!(b.triangles.is_empty());
    assert_eq!(b.graph, g);
    assert!(check_divisibility(&b.graph, [&us[0], &us[1], &us[2]]).is_ok());
}

#[test]
fn unequal_counts_are_rejected() {
    let (mut g, us) = instance(7, &[1, 2]);
    g.remove_edge(0, 1);
    g.remove_edge(1, 2);
    let mut ledger = ExposureLedger::new(0, 1.0).unwrap();
    let err = balance_divisibility(&g, [&us[0], &us[1], &us[2]], &mut ledger, &BalanceConfig::default(), &mut rng_from_seed(0)).unwrap_err();
    assert!(matches!(err, BalanceError::UnequalCounts { .. } | BalanceError::OddDegree { .. }), "{err}");
}

#[test]
fn circulant_parts_are_balanced_exactly() {
    let (g, us) = instance(11, &[1, 2]);
    let mut ok = 0;
    for seed in 0..5 {
        let mut ledger = ExposureLedger::with_universe(seed, 1.0, universe(&g, &us)).unwrap();
        let Ok(b) = balance_divisibility(&g, [&us[0], &us[1], &us[2]], &mut ledger, &BalanceConfig::default(), &mut rng_from_seed(seed)) else {
            continue;
        };
        ok += 1;
        let h = &b.graph;
        for i in 0..3 {
            assert!(h.induced_edges(&us[i]).is_empty());
            let (j, k) = [(1, 2), (0, 2), (0, 1)][i];
            for &u in &us[i] {
                assert_eq!(count_into(h, u, &us[j]), count_into(h, u, &us[k]), "u = {u}");
            }
            assert!(b.trackers[i].laws_hold());
            assert!(b.trackers[i].w.iter().all(|&x| x == 0));
        }
        let mut seen = HashSet::new();
        for t in &b.triangles {
            for (a, c) in t.edges() {
                assert!(g.has_edge(a, c) && !h.has_edge(a, c));
                assert!(seen.insert((a, c)));
            }
        }
        assert_eq!(seen.len() + h.edge_count(), g.edge_count());
        assert!(ledger.audit(&b.triangles).is_clean());
    }
    assert!(ok >= 4, "{ok}/5");
}
