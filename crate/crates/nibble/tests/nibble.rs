use designforge_graph::{enumerate_triangles, rng_from_seed, ExposureLedger, Graph, Triangle};
use designforge_nibble::*;
use proptest::prelude::*;
use rand::Rng;

fn k_triangles(n: usize) -> (Graph, TriangleHypergraph) {
    let g = Graph::complete(n);
    let aux = TriangleHypergraph::new(&g, enumerate_triangles(&g, None));
    (g, aux)
}

fn star_family(aux: &TriangleHypergraph, n: usize) -> Vec<Vec<usize>> {
    let mut family: Vec<Vec<usize>> = (0..n).map(|v| aux.star(v)).collect();
    family.push((0..aux.hypergraph.vertex_count()).collect());
    family
}

/// Random linear hypergraph built greedily from random triples.
fn random_linear(n: usize, tries: usize, seed: u64) -> LinearTripleHypergraph {
    let mut rng = rng_from_seed(seed);
    let mut used = std::collections::HashSet::new();
    let mut edges = Vec::new();
    for _ in 0..tries {
        let mut e = [rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)];
        e.sort_unstable();
        if e[0] == e[1] || e[1] == e[2] {
            continue;
        }
        let pairs = [(e[0], e[1]), (e[0], e[2]), (e[1], e[2])];
        if pairs.iter().any(|p| used.contains(p)) {
            continue;
        }
        used.extend(pairs);
        edges.push(e);
    }
    LinearTripleHypergraph::new(n, edges).unwrap()
}

#[test]
fn rounds_for_point_one_is_46() {
    assert_eq!(rounds_for(0.1), 46);
    let x = (-0.1f64 * 46.0 / 2.0).exp();
    assert!((x / 0.1 - 1.0).abs() <= 0.01);
    assert_eq!(rounds_for(0.0), 0);
}

#[test]
fn linearity_is_checked() {
    let err = LinearTripleHypergraph::new(5, vec![[0, 1, 2], [0, 1, 3]]).unwrap_err();
    assert_eq!(err, HypergraphError::NotLinear(0, 1));
    assert!(matches!(
        LinearTripleHypergraph::new(5, vec![[0, 0, 2]]),
        Err(HypergraphError::BadEdge(_))
    ));
    assert!(matches!(
        LinearTripleHypergraph::new(3, vec![[0, 1, 3]]),
        Err(HypergraphError::BadEdge(_))
    ));
}

#[test]
fn triangle_hypergraph_of_k5() {
    let (g, aux) = k_triangles(5);
    let h = &aux.hypergraph;
    assert_eq!(h.vertex_count(), g.edge_count());
    assert_eq!(h.edge_count(), 10);
    assert!((0..h.vertex_count()).all(|v| h.degree(v) == 3));
    assert_eq!(aux.star(0).len(), 4);
}

#[test]
fn saturated_bite_takes_every_edge() {
    let h = LinearTripleHypergraph::new(8, vec![[0, 1, 2], [2, 3, 4], [5, 6, 7]]).unwrap();
    let r = nibble_round(&h, &[true; 8], 0.5, 1.0, &[], &mut rng_from_seed(1));
    assert_eq!(r.stats.bite_prob, 1.0);
    assert_eq!(r.bite, vec![0, 1, 2]);
    assert_eq!(r.matching, vec![2]);
    assert!(r.alive.iter().all(|&a| !a));
}

#[test]
fn zero_rate_bites_nothing() {
    let (_, aux) = k_triangles(9);
    let h = &aux.hypergraph;
    let all: Vec<usize> = (0..h.vertex_count()).collect();
    let alive = vec![true; h.vertex_count()];
    let r = nibble_round(h, &alive, 7.0, 0.0, &[all.clone()], &mut rng_from_seed(2));
    assert!(r.bite.is_empty() && r.matching.is_empty());
    assert_eq!(r.alive, alive);
    assert_eq!(r.stats.sets[0].survived, all.len());
    assert_eq!(r.stats.sets[0].matched, 0);
}

#[test]
fn k151_first_round_survival() {
    let (_, aux) = k_triangles(151);
    let h = &aux.hypergraph;
    let all: Vec<usize> = (0..h.vertex_count()).collect();
    let alive = vec![true; h.vertex_count()];
    let family = [all];
    let mean: f64 = (0..50)
        .map(|seed| {
            let r = nibble_round(h, &alive, 149.0, 0.1, &family, &mut rng_from_seed(seed));
            r.stats.sets[0].survived as f64 / r.stats.sets[0].before as f64
        })
        .sum::<f64>()
        / 50.0;
    assert!((mean - (-0.1f64).exp()).abs() <= 0.01, "mean survival {mean}");
}

#[test]
fn perfect_matching_is_kept() {
    let edges: Vec<[usize; 3]> = (0..100).map(|i| [3 * i, 3 * i + 1, 3 * i + 2]).collect();
    let h = LinearTripleHypergraph::new(300, edges).unwrap();
    let r = nibble_round(&h, &[true; 300], 1.0, 1.0, &[], &mut rng_from_seed(3));
    assert_eq!(r.matching.len(), 100);
    let r = nibble_round(&h, &[true; 300], 1.0, 0.95, &[], &mut rng_from_seed(3));
    assert_eq!(r.matching, r.bite);
    assert!(r.matching.len() >= 85);
}

#[test]
fn full_thinning_empties_the_matching() {
    let (_, aux) = k_triangles(21);
    let family = star_family(&aux, 21);
    let cfg = NibbleConfig {
        gamma: 1.0,
        thinning: Thinning::Plain,
        ..Default::default()
    };
    let pm = pseudo_matching(&aux.hypergraph, 19.0, &family, &cfg, &mut rng_from_seed(4)).unwrap();
    assert!(pm.matching.is_empty());
    assert!(pm.sets.iter().zip(&family).all(|(s, f)| s.uncovered == f.len()));
}

#[test]
fn k151_band_hits() {
    let (_, aux) = k_triangles(151);
    let family = star_family(&aux, 151);
    for seed in 0..5 {
        let pm = pseudo_matching(&aux.hypergraph, 149.0, &family, &NibbleConfig::default(), &mut rng_from_seed(seed))
            .unwrap();
        assert!(aux.hypergraph.is_matching(&pm.matching));
        assert!(pm.band_hit_rate() >= 0.9, "seed {seed}: {}", pm.band_hit_rate());
    }
}

#[test]
fn round_stats_recount() {
    let h = random_linear(60, 800, 5);
    let family: Vec<Vec<usize>> = vec![(0..60).collect(), (0..20).collect(), (10..45).step_by(2).collect()];
    let mut alive = vec![true; 60];
    let mut rng = rng_from_seed(6);
    for _ in 0..6 {
        let d = measured_degree(&h, &alive);
        if d == 0.0 {
            break;
        }
        let before = alive.clone();
        let r = nibble_round(&h, &before, d, 0.3, &family, &mut rng);
        let mut hit = vec![0; 60];
        for &k in &r.bite {
            assert!(h.edge(k).iter().all(|&v| before[v]));
            for v in h.edge(k) {
                hit[v] += 1;
            }
        }
        for &k in &r.matching {
            assert!(r.bite.contains(&k));
            assert!(h.edge(k).iter().all(|&v| hit[v] == 1));
        }
        for (k, e) in h.edges().iter().enumerate() {
            if r.bite.contains(&k) && e.iter().all(|&v| hit[v] == 1) {
                assert!(r.matching.contains(&k));
            }
        }
        let mut in_m = vec![false; 60];
        for &k in &r.matching {
            for v in h.edge(k) {
                in_m[v] = true;
            }
        }
        for (s, st) in family.iter().zip(&r.stats.sets) {
            assert_eq!(st.before, s.iter().filter(|&&v| before[v]).count());
            assert_eq!(st.survived, s.iter().filter(|&&v| before[v] && hit[v] == 0).count());
            assert_eq!(st.matched, s.iter().filter(|&&v| in_m[v]).count());
        }
        assert!(r.alive.iter().zip(&before).all(|(&a, &b)| !a || b));
        alive = r.alive;
    }
}

#[test]
fn round_stats_serialize_as_json_lines() {
    let (_, aux) = k_triangles(15);
    let family = star_family(&aux, 15);
    let pm = pseudo_matching(&aux.hypergraph, 13.0, &family, &NibbleConfig::default(), &mut rng_from_seed(7)).unwrap();
    let lines: Vec<String> = pm.rounds.iter().map(|r| serde_json::to_string(r).unwrap()).collect();
    assert!(lines.iter().all(|l| !l.contains('\n')));
    let back: NibbleRoundStats = serde_json::from_str(&lines[0]).unwrap();
    assert_eq!(back, pm.rounds[0]);
}

#[test]
fn errors_are_reported() {
    let (_, aux) = k_triangles(9);
    let h = &aux.hypergraph;
    let family = vec![vec![0, 1]];
    let cfg = NibbleConfig {
        min_set_size: 3,
        ..Default::default()
    };
    assert!(matches!(
        pseudo_matching(h, 7.0, &family, &cfg, &mut rng_from_seed(8)),
        Err(NibbleError::SetTooSmall { index: 0, size: 2, floor: 3 })
    ));
    let cfg = NibbleConfig {
        collapse_floor: 100.0,
        ..Default::default()
    };
    assert!(matches!(
        pseudo_matching(h, 7.0, &[], &cfg, &mut rng_from_seed(8)),
        Err(NibbleError::DegreeCollapse { round: 1, .. })
    ));
    let cfg = NibbleConfig {
        gamma: 1.5,
        ..Default::default()
    };
    assert!(matches!(
        pseudo_matching(h, 7.0, &[], &cfg, &mut rng_from_seed(8)),
        Err(NibbleError::Gamma(_))
    ));
}

#[test]
fn unexposed_host_gives_no_triangles() {
    let (g, _) = k_triangles(12);
    let tris = enumerate_triangles(&g, None);
    let mut ledger = ExposureLedger::with_universe(1, 0.0, tris.clone()).unwrap();
    let r = almost_triangle_decomposition(&g, &mut ledger, &tris, &AlmostConfig::default(), &mut rng_from_seed(9))
        .unwrap();
    assert!(r.triangles.is_empty());
    assert_eq!(r.leftover.edges(), g.edges());
    assert!(r.nibble.is_none());
}

#[test]
fn k4_takes_at_most_one_triangle() {
    let (g, _) = k_triangles(4);
    let tris = enumerate_triangles(&g, None);
    for seed in 0..10 {
        let mut ledger = ExposureLedger::with_universe(seed, 1.0, tris.clone()).unwrap();
        let cfg = AlmostConfig {
            gamma: 1e-3,
            ..Default::default()
        };
        let r = almost_triangle_decomposition(&g, &mut ledger, &tris, &cfg, &mut rng_from_seed(seed)).unwrap();
        assert!(r.triangles.len() <= 1);
        assert!(r.leftover.edge_count() >= 3);
    }
}

#[test]
fn k99_leftover_degrees() {
    let n = 99;
    let (g, _) = k_triangles(n);
    let tris = enumerate_triangles(&g, None);
    let mut good = 0;
    for seed in 0..20 {
        let mut ledger = ExposureLedger::with_universe(seed, 1.0, tris.clone()).unwrap();
        let r = almost_triangle_decomposition(&g, &mut ledger, &tris, &AlmostConfig::default(), &mut rng_from_seed(seed))
            .unwrap();
        let mut used = Graph::new(n);
        for t in &r.triangles {
            for (u, v) in t.edges() {
                assert!(used.add_edge(u, v), "edge {u}-{v} reused");
            }
        }
        assert_eq!(used.edge_count() + r.leftover.edge_count(), g.edge_count());
        assert!(ledger.audit(&r.triangles).is_clean());
        assert!(r.triangles.iter().all(|t| ledger.claimed_by(t) == Some("almost")));
        if r.leftover_max_degree as f64 <= 0.1 * n as f64 * 1.3 {
            good += 1;
        }
    }
    assert!(good >= 18, "{good}/20 seeds within the degree cap");
}

#[test]
fn irregular_aux_is_rejected() {
    let g = Graph::complete(10);
    let tris: Vec<Triangle> = enumerate_triangles(&g, None).into_iter().filter(|t| !t.contains(9)).collect();
    let mut ledger = ExposureLedger::with_universe(3, 1.0, tris.clone()).unwrap();
    let cfg = AlmostConfig {
        aux_tolerance: Some(0.1),
        ..Default::default()
    };
    assert!(matches!(
        almost_triangle_decomposition(&g, &mut ledger, &tris, &cfg, &mut rng_from_seed(1)),
        Err(AlmostError::Irregular { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rounds_for_is_the_smallest(eps in 0.01f64..0.6) {
        let t = rounds_for(eps);
        prop_assert!((-eps * t as f64 / 2.0).exp() <= 1.01 * eps);
        prop_assert!(t == 0 || (-eps * (t - 1) as f64 / 2.0).exp() > 1.01 * eps);
    }

    #[test]
    fn pseudo_matching_is_a_matching(n in 9usize..40, tries in 10usize..300, seed in 0u64..1000, gamma in 0.0f64..0.5) {
        let h = random_linear(n, tries, seed);
        let family = vec![(0..n).collect::<Vec<_>>(), (0..n / 2).collect()];
        let cfg = NibbleConfig { gamma, ..Default::default() };
        let pm = pseudo_matching(&h, measured_degree(&h, &vec![true; n]), &family, &cfg, &mut rng_from_seed(seed)).unwrap();
        prop_assert!(h.is_matching(&pm.matching));
        let unc = uncovered_counts(&h, &pm.matching, &family);
        for (s, u) in pm.sets.iter().zip(&unc) {
            prop_assert_eq!(s.uncovered, *u);
        }
        let mut live = n;
        for r in &pm.rounds {
            prop_assert_eq!(r.live_before, live);
            prop_assert!(r.live_after <= r.live_before);
            prop_assert!(r.matching_size <= r.bite_size);
            live = r.live_after;
        }
    }
}
