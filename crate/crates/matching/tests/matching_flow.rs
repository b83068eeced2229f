use designforge_graph::{rng_from_seed, validate_one_factorization, BipartiteGraph};
use designforge_matching::*;
use proptest::prelude::*;
use rand::Rng;

fn random_bipartite(nl: usize, nr: usize, max_edges: usize, rng: &mut impl Rng) -> BipartiteGraph {
    let mut g = BipartiteGraph::new(nl, nr);
    let target = rng.gen_range(0..=max_edges.min(nl * nr));
    while g.edge_count() < target {
        g.add_edge(rng.gen_range(0..nl), rng.gen_range(0..nr));
    }
    g
}

fn random_balanced_spec(g: &BipartiteGraph, rng: &mut impl Rng) -> DegreeSpec {
    // Degrees of a random subgraph half the time (feasible), random otherwise.
    if rng.gen_bool(0.5) {
        let mut f = DegreeSpec::constant(g.left_count(), g.right_count(), 0);
        for (a, b) in g.edges() {
            if rng.gen_bool(0.5) {
                f.left[a] += 1;
                f.right[b] += 1;
            }
        }
        f
    } else {
        loop {
            let left: Vec<usize> = (0..g.left_count()).map(|_| rng.gen_range(0..4)).collect();
            let mut right: Vec<usize> = (0..g.right_count()).map(|_| rng.gen_range(0..4)).collect();
            let sl: usize = left.iter().sum();
            let sr: usize = right.iter().sum();
            if sr <= sl {
                let mut extra = sl - sr;
                let nr = right.len();
                let mut i = 0;
                while extra > 0 && i < 4 * nr {
                    let b = i % nr;
                    if right[b] < 4 {
                        right[b] += 1;
                        extra -= 1;
                    }
                    i += 1;
                }
                if extra == 0 {
                    return DegreeSpec { left, right };
                }
            }
        }
    }
}

#[test]
fn k33_has_a_perfect_matching() {
    let g = BipartiteGraph::complete(3, 3);
    let m = perfect_matching(&g).unwrap();
    assert!(is_perfect_matching(&g, &m));
}

#[test]
fn isolated_vertex_is_the_hall_violator() {
    let g = BipartiteGraph::from_edges(2, 2, &[(0, 0)]);
    match perfect_matching(&g) {
        Err(MatchingError::HallViolator { left, neighbourhood }) => {
            assert_eq!(left, vec![1]);
            assert!(neighbourhood.is_empty());
        }
        other => panic!("expected violator, got {other:?}"),
    }
    assert!(matches!(
        perfect_matching(&BipartiteGraph::new(2, 3)),
        Err(MatchingError::UnequalParts { left: 2, right: 3 })
    ));
}

#[test]
fn six_cycle_matchings() {
    // a_i ~ b_i and a_i ~ b_{i+1 mod 3}
    let g = BipartiteGraph::from_edges(3, 3, &[(0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (2, 0)]);
    let m = perfect_matching(&g).unwrap();
    assert_eq!(m.len(), 3);
    // Exhaustive: count permutations that are matchings.
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let valid: Vec<_> = perms
        .iter()
        .filter(|p| (0..3).all(|a| g.has_edge(a, p[a])))
        .collect();
    assert_eq!(valid.len(), 2);
    let got: Vec<usize> = m.iter().map(|&(_, b)| b).collect();
    assert!(valid.iter().any(|p| p[..] == got[..]));
}

#[test]
fn f_factor_examples() {
    let g = BipartiteGraph::complete(3, 3);
    let empty = f_factor(&g, &DegreeSpec::constant(3, 3, 0)).unwrap();
    assert_eq!(empty.edge_count(), 0);
    let all = f_factor(&g, &DegreeSpec::constant(3, 3, 3)).unwrap();
    assert_eq!(all, g);

    let g = BipartiteGraph::from_edges(2, 2, &[(0, 0), (0, 1), (1, 0)]);
    let h = f_factor(&g, &DegreeSpec::constant(2, 2, 1)).unwrap();
    assert_eq!(h.edges(), vec![(0, 1), (1, 0)]);
    // Brute force over all 8 subgraphs finds exactly this one.
    let edges = g.edges();
    let sols: Vec<u32> = (0u32..8)
        .filter(|mask| {
            let mut dl = [0; 2];
            let mut dr = [0; 2];
            for (i, &(a, b)) in edges.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    dl[a] += 1;
                    dr[b] += 1;
                }
            }
            dl == [1, 1] && dr == [1, 1]
        })
        .collect();
    assert_eq!(sols.len(), 1);

    assert!(matches!(
        f_factor(&g, &DegreeSpec { left: vec![1, 1], right: vec![1, 0] }),
        Err(FFactorError::Unbalanced { left: 2, right: 1 })
    ));
}

#[test]
fn oracle_examples() {
    let g = BipartiteGraph::from_edges(2, 2, &[(0, 0), (0, 1), (1, 0)]);
    assert!(f_factor_oracle(&g, &DegreeSpec::constant(2, 2, 0)).unwrap());
    assert!(!f_factor_oracle(&g, &DegreeSpec::constant(2, 2, 2)).unwrap());
    let err = f_factor(&g, &DegreeSpec::constant(2, 2, 2)).unwrap_err();
    match err {
        FFactorError::Infeasible(w) => assert!(w.violates(&g, &DegreeSpec::constant(2, 2, 2))),
        other => panic!("{other:?}"),
    }
    let big = BipartiteGraph::complete(5, 5);
    assert_eq!(
        f_factor_oracle(&big, &DegreeSpec::constant(5, 5, 1)),
        Err(OracleError::TooLarge(25))
    );
}

#[test]
fn oracle_cross_validation_200() {
    let mut rng = rng_from_seed(0xF00D);
    for _ in 0..200 {
        let nl = rng.gen_range(1..=5);
        let nr = rng.gen_range(1..=5);
        let g = random_bipartite(nl, nr, 16, &mut rng);
        let f = random_balanced_spec(&g, &mut rng);
        let oracle = f_factor_oracle(&g, &f).unwrap();
        match f_factor(&g, &f) {
            Ok(h) => {
                assert!(oracle);
                for a in 0..nl {
                    assert_eq!(h.left_degree(a), f.left[a]);
                }
                for b in 0..nr {
                    assert_eq!(h.right_degree(b), f.right[b]);
                }
                assert!(h.edges().iter().all(|&(a, b)| g.has_edge(a, b)));
            }
            Err(FFactorError::Infeasible(w)) => {
                assert!(!oracle);
                assert!(w.violates(&g, &f));
            }
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn one_factorize_examples() {
    let mut rng = rng_from_seed(1);
    let empty = BipartiteGraph::new(4, 4);
    assert!(one_factorize(&empty, &mut rng).unwrap().is_empty());

    let k44 = BipartiteGraph::complete(4, 4);
    let f = one_factorize(&k44, &mut rng).unwrap();
    assert_eq!(f.len(), 4);
    assert!(validate_one_factorization(&k44, &f).valid);

    let two_c4 = BipartiteGraph::from_edges(
        4,
        4,
        &[(0, 0), (0, 1), (1, 0), (1, 1), (2, 2), (2, 3), (3, 2), (3, 3)],
    );
    let f = one_factorize(&two_c4, &mut rng).unwrap();
    assert_eq!(f.len(), 2);
    assert!(f.iter().all(|m| m.len() == 4));
    assert!(validate_one_factorization(&two_c4, &f).valid);

    let mut irregular = BipartiteGraph::complete(3, 3);
    irregular.remove_edge(0, 0);
    assert_eq!(one_factorize(&irregular, &mut rng), Err(FactorizeError::NotRegular));
}

#[test]
fn many_matchings_endpoints() {
    let mut rng = rng_from_seed(3);
    let n = 12;
    let h = BipartiteGraph::complete(n, n);
    let all = many_disjoint_matchings(&h, |_, _| true, n, Some(0.1), &mut rng).unwrap();
    assert!(validate_one_factorization(&h, &all).valid);
    match many_disjoint_matchings(&h, |_, _| false, 1, None, &mut rng) {
        Err(ManyMatchingsError::Failed { iteration: 1, found: 0, .. }) => {}
        other => panic!("{other:?}"),
    }
    let mut sparse = h.clone();
    for b in 1..n {
        sparse.remove_edge(0, b);
    }
    assert!(matches!(
        many_disjoint_matchings(&sparse, |_, _| true, 1, Some(0.1), &mut rng),
        Err(ManyMatchingsError::MinDegree { .. })
    ));
}

#[test]
fn many_matchings_monte_carlo_n64() {
    let n = 64;
    let p = 8.0 * (n as f64).ln() / n as f64;
    let h = BipartiteGraph::complete(n, n);
    let mut ok = 0;
    for trial in 0..100u64 {
        let mut rng = rng_from_seed(1000 + trial);
        let mut coin = rng_from_seed(5000 + trial);
        let res = many_disjoint_matchings(&h, |_, _| coin.gen::<f64>() < p, 4, Some(0.05), &mut rng);
        if let Ok(ms) = res {
            assert_eq!(ms.len(), 4);
            ok += 1;
        }
    }
    assert!(ok >= 90, "success {ok}/100");
}

#[test]
fn reservoir_single_and_disjoint() {
    let mut rng = rng_from_seed(8);
    let inst = ReservoirInstance {
        left: vec![0, 1, 2],
        right: vec![10, 11, 12],
        edges: BipartiteGraph::complete(3, 3).edges(),
    };
    let cfg = ReservoirConfig::new(20, 0.3);
    let out = reservoir_matchings(std::slice::from_ref(&inst), &cfg, &mut rng).unwrap();
    assert_eq!(out.matchings.len(), 1);
    assert_eq!(out.matchings[0].len(), 3);
    assert_eq!(out.candidates[0], 3);

    let other = ReservoirInstance {
        left: vec![3, 4],
        right: vec![13, 14],
        edges: vec![(0, 0), (1, 1)],
    };
    let out = reservoir_matchings(&[inst, other], &cfg, &mut rng).unwrap();
    assert_eq!(out.matchings[1], vec![(3, 13), (4, 14)]);
}

#[test]
fn reservoir_thirty_overlapping_instances() {
    let mut rng = rng_from_seed(30);
    let k = 40;
    let instances: Vec<ReservoirInstance> = (0..30)
        .map(|i| ReservoirInstance {
            left: (0..k).map(|x| i * 36 + x).collect(),
            right: (0..k).map(|x| 100_000 + i * 36 + x).collect(),
            edges: BipartiteGraph::complete(k, k).edges(),
        })
        .collect();
    for i in 0..30 {
        for j in i + 1..30 {
            let ov = instances[i].left.iter().filter(|v| instances[j].left.contains(v)).count();
            assert!(ov <= 4);
        }
    }
    let cfg = ReservoirConfig::new(400, 0.1);
    let out = reservoir_matchings(&instances, &cfg, &mut rng).unwrap();
    let mut seen = std::collections::HashSet::new();
    for (m, inst) in out.matchings.iter().zip(&instances) {
        assert_eq!(m.len(), k);
        let mut l: Vec<usize> = m.iter().map(|e| e.0).collect();
        l.sort_unstable();
        assert_eq!(l, inst.left);
        for &e in m {
            assert!(seen.insert(e), "edge {e:?} reused");
        }
    }
}

#[test]
fn reservoir_reports_unbalanced_and_collapse() {
    let mut rng = rng_from_seed(2);
    let bad = ReservoirInstance { left: vec![0, 1], right: vec![5], edges: vec![] };
    assert!(matches!(
        reservoir_matchings(&[bad], &ReservoirConfig::new(10, 0.2), &mut rng),
        Err(ReservoirError::Unbalanced { instance: 0, .. })
    ));
    let a = ReservoirInstance { left: vec![0], right: vec![1], edges: vec![(0, 0)] };
    let out = reservoir_matchings(&[a.clone(), a], &ReservoirConfig::new(10, 0.2), &mut rng);
    assert!(matches!(out, Err(ReservoirError::NoMatching { instance: 1, .. })));
}

#[test]
fn random_regular_generator() {
    let mut rng = rng_from_seed(4);
    for (n, d) in [(10, 3), (32, 31), (50, 25), (7, 0), (9, 9)] {
        let g = random_regular_bipartite(n, d, 20 * n * d, &mut rng);
        assert_eq!(g.is_regular(), Some(d));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn f_factor_degrees_or_valid_witness(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let g = random_bipartite(rng.gen_range(1..7), rng.gen_range(1..7), 30, &mut rng);
        let f = random_balanced_spec(&g, &mut rng);
        match f_factor_shuffled(&g, &f, &mut rng) {
            Ok(h) => {
                for a in 0..g.left_count() { prop_assert_eq!(h.left_degree(a), f.left[a]); }
                for b in 0..g.right_count() { prop_assert_eq!(h.right_degree(b), f.right[b]); }
            }
            Err(FFactorError::Infeasible(w)) => prop_assert!(w.violates(&g, &f)),
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn max_matching_size_matches_brute_force(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let g = random_bipartite(5, 5, 14, &mut rng);
        let m = maximum_matching(&g);
        // Brute force via injective maps of subsets.
        let edges = g.edges();
        let mut best = 0;
        for mask in 0u32..(1 << edges.len()) {
            let mut l = [false; 5];
            let mut r = [false; 5];
            let mut ok = true;
            let mut size = 0;
            for (i, &(a, b)) in edges.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    if l[a] || r[b] { ok = false; break; }
                    l[a] = true; r[b] = true; size += 1;
                }
            }
            if ok { best = best.max(size); }
        }
        prop_assert_eq!(m.size, best);
        if best < 5 {
            let (x, nx) = hall_violator(&g, &m);
            prop_assert!(nx.len() < x.len());
            let mut union: Vec<usize> = x.iter().flat_map(|&a| g.left_neighbors(a).to_vec()).collect();
            union.sort_unstable();
            union.dedup();
            prop_assert_eq!(union, nx);
        }
    }

    #[test]
    fn one_factorize_is_valid(seed in any::<u64>(), n in 1usize..24, frac in 0.0f64..=1.0) {
        let mut rng = rng_from_seed(seed);
        let d = ((n as f64) * frac).round() as usize;
        let g = random_regular_bipartite(n, d, 10 * n * d.max(1), &mut rng);
        let f = one_factorize(&g, &mut rng).unwrap();
        prop_assert!(validate_one_factorization(&g, &f).valid);
    }
}
