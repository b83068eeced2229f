use designforge_graph::{BipartiteGraph, ExposureLedger, Graph, LedgerError, Triangle};
use designforge_matching::many_disjoint_matchings;
use rand::Rng;
use std::collections::HashMap;

/// Removes the three edges of `t`; panics if one is missing.
pub(crate) fn remove_triangle(g: &mut Graph, t: &Triangle) {
    for (u, v) in t.edges() {
        assert!(g.remove_edge(u, v), "edge {u}-{v} of {t} already gone");
    }
}

pub(crate) fn claim_all(
    ledger: &mut ExposureLedger,
    ts: &[Triangle],
    stage: &str,
) -> Result<(), LedgerError> {
    for t in ts {
        ledger.claim(t, stage)?;
    }
    Ok(())
}

/// Whether `t` is in the ledger's universe and present; exposes it if not yet.
pub(crate) fn present(ledger: &mut ExposureLedger, t: &Triangle) -> Result<bool, LedgerError> {
    ledger.expose(t)
}

/// Perfect matching between `0..nl` and `0..nr` over the pairs whose
/// triangle `tri(a, b)` exists and is exposed-present. Returns the matched
/// triangles, or `None` when no perfect matching exists.
pub(crate) fn triangle_matching<R: Rng + ?Sized>(
    nl: usize,
    nr: usize,
    tri: impl Fn(usize, usize) -> Option<Triangle>,
    ledger: &mut ExposureLedger,
    rng: &mut R,
) -> Result<Option<Vec<Triangle>>, LedgerError> {
    let mut h = BipartiteGraph::new(nl, nr);
    let mut found = HashMap::new();
    for a in 0..nl {
        for b in 0..nr {
            if let Some(t) = tri(a, b) {
                if present(ledger, &t)? {
                    h.add_edge(a, b);
                    found.insert((a, b), t);
                }
            }
        }
    }
    Ok(many_disjoint_matchings(&h, |_, _| true, 1, None, rng)
        .ok()
        .map(|m| m[0].iter().map(|ab| found[ab]).collect()))
}

/// Perfect matching of the graph on `vs` with adjacency `adj`, by
/// min-degree-first backtracking with randomized branch order. Gives up
/// after `budget` branch nodes.
pub(crate) fn small_perfect_matching<R: Rng + ?Sized>(
    vs: &[usize],
    adj: &dyn Fn(usize, usize) -> bool,
    budget: usize,
    rng: &mut R,
) -> Option<Vec<(usize, usize)>> {
    use rand::seq::SliceRandom;
    let k = vs.len();
    if k % 2 == 1 {
        return None;
    }
    let nb: Vec<Vec<usize>> = (0..k)
        .map(|a| (0..k).filter(|&b| b != a && adj(vs[a], vs[b])).collect())
        .collect();
    let mut mate = vec![usize::MAX; k];
    let mut nodes = 0usize;
    fn go<R: Rng + ?Sized>(
        nb: &[Vec<usize>],
        mate: &mut Vec<usize>,
        nodes: &mut usize,
        budget: usize,
        rng: &mut R,
    ) -> bool {
        let free =
            |a: usize, mate: &Vec<usize>| nb[a].iter().filter(|&&b| mate[b] == usize::MAX).count();
        let pick = (0..mate.len())
            .filter(|&a| mate[a] == usize::MAX)
            .min_by_key(|&a| free(a, mate));
        let Some(a) = pick else { return true };
        let mut opts: Vec<usize> = nb[a]
            .iter()
            .copied()
            .filter(|&b| mate[b] == usize::MAX)
            .collect();
        opts.shuffle(rng);
        for b in opts {
            *nodes += 1;
            if *nodes > budget {
                return false;
            }
            mate[a] = b;
            mate[b] = a;
            if go(nb, mate, nodes, budget, rng) {
                return true;
            }
            mate[a] = usize::MAX;
            mate[b] = usize::MAX;
        }
        false
    }
    go(&nb, &mut mate, &mut nodes, budget, rng).then(|| {
        (0..k)
            .filter(|&a| a < mate[a])
            .map(|a| (vs[a], vs[mate[a]]))
            .collect()
    })
}
