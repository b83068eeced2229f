use std::collections::HashSet;

use designforge_graph::{enumerate_triangles, rng_from_seed, ExposureLedger, Graph, Triangle};
use designforge_reductions::{cover_down_part, CoverDownConfig, CoverDownError};

fn ledger_for(g: &Graph, seed: u64) -> ExposureLedger {
    ExposureLedger::with_universe(seed, 1.0, enumerate_triangles(g, None)).unwrap()
}

/// Edge-disjoint triangles of `g` whose edges together with `rest` are
/// exactly `E(g)`.
fn partitions(g: &Graph, ts: &[Triangle], rest: &Graph) -> bool {
    let mut seen = HashSet::new();
    for t in ts {
        for (a, b) in t.edges() {
            if !g.has_edge(a, b) || rest.has_edge(a, b) || !seen.insert((a, b)) {
                return false;
            }
        }
    }
    rest.edges().iter().all(|&(a, b)| g.has_edge(a, b)) && seen.len() + rest.edge_count() == g.edge_count()
}

#[test]
fn empty_graph_is_left_alone() {
    let g = Graph::new(12);
    let u: Vec<usize> = (0..3).collect();
    let mut ledger = ExposureLedger::new(0, 1.0).unwrap();
    let cd = cover_down_part(&g, &u, &mut ledger, &CoverDownConfig::default(), &mut rng_from_seed(0)).unwrap();
    assert!(cd.triangles.is_empty());
    assert_eq!(cd.remainder, g);
}

#[test]
fn odd_degree_outside_u_is_named() {
    // K_6: every degree is 5.
    let g = Graph::complete(6);
    let u = vec![0, 1];
    let mut ledger = ledger_for(&g, 0);
    let err = cover_down_part(&g, &u, &mut ledger, &CoverDownConfig::default(), &mut rng_from_seed(0)).unwrap_err();
    assert_eq!(err, CoverDownError::Parity { vertex: 2, degree: 5 });
}

#[test]
fn complete_odd_graph_is_covered_down_to_u() {
    let mut passes = 0;
    for m in [35usize, 45] {
        let g = Graph::complete(m);
        let u: Vec<usize> = (0..m / 5).collect();
        let in_u: HashSet<usize> = u.iter().copied().collect();
        for seed in 0..3 {
            let mut ledger = ledger_for(&g, seed);
            let Ok(cd) = cover_down_part(&g, &u, &mut ledger, &CoverDownConfig::default(), &mut rng_from_seed(seed)) else {
                continue;
            };
            // Conclusion (a): nothing outside U keeps an edge.
            for v in 0..m {
                if !in_u.contains(&v) {
                    assert_eq!(cd.remainder.degree(v), 0, "m = {m}, seed {seed}, v = {v}");
                }
            }
            assert!(partitions(&g, &cd.triangles, &cd.remainder));
            assert!(ledger.audit(&cd.triangles).is_clean());
            let min_u = u.iter().map(|&x| cd.remainder.degree(x)).min().unwrap();
            assert_eq!(min_u, cd.report.min_u_degree);
            passes += 1;
        }
    }
    assert!(passes >= 5, "only {passes} of 6 runs succeeded");
}

/// Conclusion (b), `d_{G*}(v) ≥ |U| − 2ε₂n` on `U`. With `|U| = ⌊0.2m⌋` the
/// slack `2ε₂m` is below two edges, while the finishing matchings must use
/// edges inside `U`, so this fails at these sizes.
#[test]
#[ignore = "degree floor on U is out of reach at desk scale; see README"]
fn complete_odd_graph_keeps_u_dense() {
    for m in [35usize, 45] {
        let g = Graph::complete(m);
        let u: Vec<usize> = (0..m / 5).collect();
        let mut ledger = ledger_for(&g, 0);
        let cd = cover_down_part(&g, &u, &mut ledger, &CoverDownConfig::default(), &mut rng_from_seed(0)).unwrap();
        let floor = u.len() as f64 - 2.0 * 0.02 * m as f64;
        for &x in &u {
            assert!(cd.remainder.degree(x) as f64 >= floor, "m = {m}: d({x}) = {}", cd.remainder.degree(x));
        }
    }
}
