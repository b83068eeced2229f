use designforge_graph::BipartiteGraph;
use rand::seq::{index::sample, SliceRandom};
use rand::Rng;

/// Random `d`-regular bipartite graph on `n + n` vertices: a circulant with
/// `d` random distinct shifts, randomly relabeled on the right, then mixed
/// by `switches` degree-preserving 2-switches.
pub fn random_regular_bipartite<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    switches: usize,
    rng: &mut R,
) -> BipartiteGraph {
    assert!(d <= n, "degree {d} exceeds side size {n}");
    let shifts = sample(rng, n.max(1), d).into_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut g = BipartiteGraph::new(n, n);
    for a in 0..n {
        for &s in &shifts {
            g.add_edge(a, perm[(a + s) % n]);
        }
    }
    if d == 0 || d == n {
        return g;
    }
    for _ in 0..switches {
        let a = rng.gen_range(0..n);
        let c = rng.gen_range(0..n);
        if a == c {
            continue;
        }
        let b = g.left_neighbors(a)[rng.gen_range(0..d)];
        let e = g.left_neighbors(c)[rng.gen_range(0..d)];
        if b == e || g.has_edge(a, e) || g.has_edge(c, b) {
            continue;
        }
        g.remove_edge(a, b);
        g.remove_edge(c, e);
        g.add_edge(a, e);
        g.add_edge(c, b);
    }
    g
}
