use std::collections::HashSet;

use designforge_graph::{rng_from_seed, sample_lists, Graph, ListAssignment, ListMode};
use designforge_solvers::{
    complete_bipartite, exhaustive_list_colouring, solve_list_edge_colouring, Certificate, Exhaustive, Outcome,
    SolveBudget, SolveError,
};
use proptest::prelude::*;

/// Proper, complete, and every colour from its edge's list.
fn is_list_colouring(lists: &ListAssignment, colours: &[usize]) -> bool {
    if colours.len() != lists.edges.len() {
        return false;
    }
    let mut seen = HashSet::new();
    lists.edges.iter().zip(colours).zip(&lists.lists).all(|((&(u, v), &c), l)| {
        l.contains(&c) && seen.insert((u, c)) && seen.insert((v, c))
    })
}

/// Exact oracle: colour classes one at a time, enumerating the perfect
/// matchings of each colour's admissible edges.
fn oracle_colourable(n: usize, lists: &ListAssignment) -> bool {
    let cell = |i: usize, j: usize| lists.index_of(i, n + j).unwrap();
    fn classes(
        c: usize,
        n: usize,
        done: &mut Vec<bool>,
        lists: &ListAssignment,
        cell: &dyn Fn(usize, usize) -> usize,
    ) -> bool {
        if c == n {
            return done.iter().all(|&d| d);
        }
        let mut cols = vec![false; n];
        matchings(0, c, n, &mut cols, done, lists, cell)
    }
    fn matchings(
        row: usize,
        c: usize,
        n: usize,
        cols: &mut Vec<bool>,
        done: &mut Vec<bool>,
        lists: &ListAssignment,
        cell: &dyn Fn(usize, usize) -> usize,
    ) -> bool {
        if row == n {
            return classes(c + 1, n, done, lists, cell);
        }
        for j in 0..n {
            let e = cell(row, j);
            if !cols[j] && !done[e] && lists.lists[e].contains(&c) {
                cols[j] = true;
                done[e] = true;
                let ok = matchings(row + 1, c, n, cols, done, lists, cell);
                cols[j] = false;
                done[e] = false;
                if ok {
                    return true;
                }
            }
        }
        false
    }
    let mut done = vec![false; lists.edges.len()];
    classes(0, n, &mut done, lists, &cell)
}

fn knn_lists(n: usize, p: f64, seed: u64) -> (Graph, ListAssignment) {
    let g = complete_bipartite(n);
    let l = sample_lists(&g.edges(), ListMode::Binomial(p), n, &mut rng_from_seed(seed)).unwrap();
    (g, l)
}

#[test]
fn full_lists_always_succeed() {
    for n in [1usize, 2, 5, 12, 20] {
        let (g, l) = knn_lists(n, 1.0, n as u64);
        let r = solve_list_edge_colouring(&g, &l, &SolveBudget::default(), &mut rng_from_seed(0)).unwrap();
        assert!(is_list_colouring(&l, r.colouring().unwrap()), "n = {n}");
    }
}

#[test]
fn empty_list_is_named() {
    let (g, mut l) = knn_lists(4, 1.0, 0);
    let i = l.index_of(2, 5).unwrap();
    l.lists[i].clear();
    let r = solve_list_edge_colouring(&g, &l, &SolveBudget::default(), &mut rng_from_seed(0)).unwrap();
    assert_eq!(r.outcome, Outcome::Infeasible(Certificate::EmptyList { edge: (2, 5) }));
    assert_eq!(r.to_json()["status"], "infeasible");
}

#[test]
fn missing_colour_at_a_vertex_gives_a_hall_violator() {
    let (g, mut l) = knn_lists(3, 1.0, 0);
    for j in 3..6 {
        let i = l.index_of(0, j).unwrap();
        l.lists[i].retain(|&c| c != 1);
    }
    let r = solve_list_edge_colouring(&g, &l, &SolveBudget::default(), &mut rng_from_seed(0)).unwrap();
    let Outcome::Infeasible(Certificate::HallViolator { colour, left, neighbourhood }) = r.outcome else {
        panic!("{:?}", r.outcome);
    };
    assert_eq!(colour, 1);
    assert!(left.len() > neighbourhood.len());
    // Every admissible colour-1 edge from `left` ends in `neighbourhood`.
    for &x in &left {
        for y in 0..6 {
            if let Some(list) = l.list(x, y) {
                if list.contains(&1) {
                    assert!(neighbourhood.contains(&y));
                }
            }
        }
    }
}

/// `K_{2,2}` where both colours can only use the same perfect matching.
fn c4_trap() -> (Graph, ListAssignment) {
    let g = complete_bipartite(2);
    let mut l = sample_lists(&g.edges(), ListMode::Derived, 2, &mut rng_from_seed(0)).unwrap();
    // Edges (0,2) (0,3) (1,2) (1,3); {(0,2), (1,3)} is one perfect matching.
    l.lists = vec![vec![0, 1], vec![0], vec![1], vec![0, 1]];
    (g, l)
}

#[test]
fn exact_search_proves_infeasibility() {
    let (g, l) = c4_trap();
    assert!(!oracle_colourable(2, &l));
    let r = solve_list_edge_colouring(&g, &l, &SolveBudget::default(), &mut rng_from_seed(0)).unwrap();
    assert!(matches!(r.outcome, Outcome::Infeasible(Certificate::Exhaustive { .. })), "{:?}", r.outcome);
}

#[test]
fn without_exact_search_the_verdict_is_exhausted() {
    let (g, l) = c4_trap();
    let budget = SolveBudget {
        restarts: 3,
        exhaustive_max_side: 0,
        ..Default::default()
    };
    let r = solve_list_edge_colouring(&g, &l, &budget, &mut rng_from_seed(0)).unwrap();
    assert_eq!(r.outcome, Outcome::Exhausted);
    assert_eq!(r.stats.restarts, 3);
    assert_eq!(r.to_json()["status"], "exhausted");
}

#[test]
fn n4_at_p09_agrees_with_exact_search() {
    let (g, l) = knn_lists(4, 0.9, 4);
    let r = solve_list_edge_colouring(&g, &l, &SolveBudget::default(), &mut rng_from_seed(1)).unwrap();
    assert!(is_list_colouring(&l, r.colouring().expect("heuristic success")));
    match exhaustive_list_colouring(&g, &l, 1_000_000).unwrap() {
        Exhaustive::Found { colouring, .. } => assert!(is_list_colouring(&l, &colouring)),
        other => panic!("{other:?}"),
    }
    assert!(oracle_colourable(4, &l));
}

#[test]
fn json_carries_the_colouring() {
    let (g, l) = knn_lists(3, 1.0, 0);
    let r = solve_list_edge_colouring(&g, &l, &SolveBudget::default(), &mut rng_from_seed(0)).unwrap();
    let j = r.to_json();
    assert_eq!(j["status"], "success");
    let col = j["colouring"].as_array().unwrap();
    assert_eq!(col.len(), 9);
    for entry in col {
        let e = entry.as_array().unwrap();
        let (u, v, c) = (e[0].as_u64().unwrap() as usize, e[1].as_u64().unwrap() as usize, e[2].as_u64().unwrap() as usize);
        assert!(l.list(u, v).unwrap().contains(&c));
    }
    assert!(j["stats"]["restarts"].as_u64().unwrap() >= 1);
}

#[test]
fn shape_errors() {
    let mut g = complete_bipartite(3);
    let l = sample_lists(&g.edges(), ListMode::Derived, 4, &mut rng_from_seed(0)).unwrap();
    assert_eq!(
        solve_list_edge_colouring(&g, &l, &SolveBudget::default(), &mut rng_from_seed(0)).unwrap_err(),
        SolveError::ColourCount { d: 3, n_colours: 4 }
    );
    g.remove_edge(0, 3);
    let l = sample_lists(&g.edges(), ListMode::Derived, 3, &mut rng_from_seed(0)).unwrap();
    assert_eq!(
        solve_list_edge_colouring(&g, &l, &SolveBudget::default(), &mut rng_from_seed(0)).unwrap_err(),
        SolveError::NotRegular
    );
    let tri = Graph::complete(3);
    let l = sample_lists(&tri.edges(), ListMode::Derived, 2, &mut rng_from_seed(0)).unwrap();
    assert!(matches!(
        solve_list_edge_colouring(&tri, &l, &SolveBudget::default(), &mut rng_from_seed(0)),
        Err(SolveError::NotBipartite(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn verdicts_match_the_exact_oracle(n in 1usize..=6, p in 0.3f64..0.95, seed in any::<u64>()) {
        let (g, l) = knn_lists(n, p, seed);
        let r = solve_list_edge_colouring(&g, &l, &SolveBudget::default(), &mut rng_from_seed(seed ^ 1)).unwrap();
        match &r.outcome {
            Outcome::Success(c) => prop_assert!(is_list_colouring(&l, c)),
            Outcome::Infeasible(_) => prop_assert!(!oracle_colourable(n, &l)),
            Outcome::Exhausted => {}
        }
    }
}
