use std::collections::HashSet;

use designforge_graph::{rng_from_seed, Graph};
use designforge_reductions::{balance_colouring, equitable_edge_colouring, EquitableError};
use proptest::prelude::*;
use rand::Rng;

/// Every class is a matching and the classes partition `E(g)`.
fn proper_partition(g: &Graph, classes: &[Vec<(usize, usize)>]) -> bool {
    let mut seen = HashSet::new();
    for cl in classes {
        let mut ends = HashSet::new();
        for &(a, b) in cl {
            if !g.has_edge(a, b) || !ends.insert(a) || !ends.insert(b) || !seen.insert((a.min(b), a.max(b))) {
                return false;
            }
        }
    }
    seen.len() == g.edge_count()
}

fn sizes_equitable(e: usize, k: usize, sizes: &[usize]) -> bool {
    sizes.len() == k && sizes.iter().all(|&s| s == e / k || s == e.div_ceil(k))
}

/// Random graph on `n` vertices with maximum degree at most `cap`.
fn random_capped(n: usize, tries: usize, cap: usize, seed: u64) -> Graph {
    let mut rng = rng_from_seed(seed);
    let mut g = Graph::new(n);
    for _ in 0..tries {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b && !g.has_edge(a, b) && g.degree(a) < cap && g.degree(b) < cap {
            g.add_edge(a, b);
        }
    }
    g
}

#[test]
fn k4_with_three_colours_is_its_one_factorization() {
    let g = Graph::complete(4);
    let cc = equitable_edge_colouring(&g, 3).unwrap();
    assert_eq!(cc.sizes(), vec![2, 2, 2]);
    assert!(proper_partition(&g, &cc.classes));
    // K_4 has exactly three perfect matchings; each class must be one.
    let pms: HashSet<Vec<(usize, usize)>> = [
        vec![(0, 1), (2, 3)],
        vec![(0, 2), (1, 3)],
        vec![(0, 3), (1, 2)],
    ]
    .into_iter()
    .collect();
    for cl in &cc.classes {
        let mut c = cl.clone();
        c.sort_unstable();
        assert!(pms.contains(&c), "{c:?}");
    }
}

#[test]
fn matching_with_one_colour_per_edge_gives_singletons() {
    let mut g = Graph::new(10);
    for i in 0..5 {
        g.add_edge(2 * i, 2 * i + 1);
    }
    let cc = equitable_edge_colouring(&g, 5).unwrap();
    assert_eq!(cc.sizes(), vec![1; 5]);
    assert!(proper_partition(&g, &cc.classes));
}

#[test]
fn divisible_edge_count_forces_equal_classes() {
    let mut seed = 0;
    let g = loop {
        let g = random_capped(40, 4000, 9, seed);
        if g.edge_count() >= 100 {
            break g;
        }
        seed += 1;
    };
    let mut h = Graph::new(40);
    for &(a, b) in g.edges().iter().take(100) {
        h.add_edge(a, b);
    }
    assert!(h.max_degree() <= 9);
    let cc = equitable_edge_colouring(&h, 10).unwrap();
    assert_eq!(cc.sizes(), vec![10; 10]);
    assert!(proper_partition(&h, &cc.classes));
}

#[test]
fn too_few_colours_is_an_error() {
    let g = Graph::complete(5);
    assert_eq!(
        equitable_edge_colouring(&g, 4).unwrap_err(),
        EquitableError::TooFewColours { k: 4, needed: 5 }
    );
}

#[test]
fn supplied_colouring_of_k4_is_balanced_below_delta_plus_one() {
    let g = Graph::complete(4);
    let edges = g.edges();
    // (0,1) (0,2) (0,3) (1,2) (1,3) (2,3)
    let colours = [0, 1, 2, 2, 1, 0];
    assert_eq!(edges.len(), colours.len());
    let cc = balance_colouring(&g, &colours, 3).unwrap();
    assert!(proper_partition(&g, &cc.classes));
    assert!(cc.is_equitable());
    let bad = [0, 0, 1, 1, 2, 2];
    assert!(matches!(
        balance_colouring(&g, &bad, 3),
        Err(EquitableError::NotProper { .. })
    ));
}

proptest! {
    #[test]
    fn proper_and_equitable(seed in any::<u64>(), n in 2usize..30, cap in 1usize..13, extra in 0usize..4) {
        let g = random_capped(n, 6 * n, cap, seed);
        let k = g.max_degree() + 1 + extra;
        let cc = equitable_edge_colouring(&g, k).unwrap();
        prop_assert!(proper_partition(&g, &cc.classes));
        prop_assert!(sizes_equitable(g.edge_count(), k, &cc.sizes()));
        prop_assert_eq!(cc.is_equitable(), true);
    }
}
