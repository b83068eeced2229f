use std::collections::HashMap;

use designforge_graph::{Graph, Triangle};
use rand::Rng;

/// Hill-climbing on an edge-disjoint triangle packing of `g` drawn from
/// `present`, minimizing the total `weight` of uncovered edges.
///
/// A step picks a random uncovered edge and a random present triangle
/// through it. If that triangle overlaps no packed triangle it is added; if
/// it overlaps exactly one, the two are swapped when the weight does not
/// rise (or, at temperature `temp > 0`, with Metropolis probability).
/// The first phase counts every edge as 1; the second starts from the best
/// first-phase packing and uses `weight` at temperature 0, so the number of
/// uncovered edges never grows again. Returns the cheapest packing seen.
pub(crate) fn improve_packing<R: Rng + ?Sized>(
    g: &Graph,
    present: &[Triangle],
    packing: &[Triangle],
    weight: impl Fn(usize, usize) -> u32,
    temp: f64,
    steps: usize,
    rng: &mut R,
) -> Vec<Triangle> {
    let edges = g.edges();
    let eid: HashMap<(usize, usize), usize> =
        edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let tri_edges = |t: &Triangle| -> Option<[usize; 3]> {
        let es = t.edges();
        Some([*eid.get(&es[0])?, *eid.get(&es[1])?, *eid.get(&es[2])?])
    };
    let tris: Vec<[usize; 3]> = present.iter().filter_map(tri_edges).collect();
    let tri_of: Vec<Triangle> = present
        .iter()
        .filter(|t| tri_edges(t).is_some())
        .copied()
        .collect();
    let mut through: Vec<Vec<usize>> = vec![Vec::new(); edges.len()];
    for (k, es) in tris.iter().enumerate() {
        for &e in es {
            through[e].push(k);
        }
    }
    let index: HashMap<Triangle, usize> = tri_of.iter().enumerate().map(|(k, &t)| (t, k)).collect();

    const FREE: usize = usize::MAX;
    let mut cover = vec![FREE; edges.len()];
    // Uncovered edges with O(1) removal.
    let mut open: Vec<usize> = Vec::new();
    let mut pos = vec![FREE; edges.len()];
    let mut packed: Vec<usize> = Vec::new();
    for t in packing {
        let k = index[t];
        packed.push(k);
        for &e in &tris[k] {
            cover[e] = k;
        }
    }
    for e in 0..edges.len() {
        if cover[e] == FREE {
            pos[e] = open.len();
            open.push(e);
        }
    }
    let take = |e: usize, open: &mut Vec<usize>, pos: &mut Vec<usize>| {
        let p = pos[e];
        let last = *open.last().unwrap();
        open.swap_remove(p);
        if last != e {
            pos[last] = p;
        }
        pos[e] = FREE;
    };
    let give = |e: usize, open: &mut Vec<usize>, pos: &mut Vec<usize>| {
        pos[e] = open.len();
        open.push(e);
    };
    let unit: Vec<i64> = vec![1; edges.len()];
    let weighted: Vec<i64> = edges.iter().map(|&(a, b)| weight(a, b) as i64).collect();
    let mut in_pack: Vec<bool> = vec![false; tris.len()];
    for &k in &packed {
        in_pack[k] = true;
    }
    let mut best_set: Vec<usize> = packed.clone();
    // Phase 1 minimizes the number of uncovered edges; phase 2 keeps that
    // number and moves uncovered edges toward cheap positions.
    for (w, temp) in [(&unit, temp), (&weighted, 0.0)] {
        if w == &weighted {
            // Restart from the best phase-1 packing.
            in_pack.iter_mut().for_each(|x| *x = false);
            cover.iter_mut().for_each(|c| *c = FREE);
            open.clear();
            for &k in &best_set {
                in_pack[k] = true;
                for &f in &tris[k] {
                    cover[f] = k;
                }
            }
            for e in 0..edges.len() {
                pos[e] = FREE;
                if cover[e] == FREE {
                    pos[e] = open.len();
                    open.push(e);
                }
            }
        }
        let mut cost: i64 = open.iter().map(|&e| w[e]).sum();
        let mut best = cost;
        for _ in 0..steps {
            if open.is_empty() {
                break;
            }
            let e = open[rng.gen_range(0..open.len())];
            let opts = &through[e];
            if opts.is_empty() {
                continue;
            }
            let k = opts[rng.gen_range(0..opts.len())];
            let mut blockers: Vec<usize> = tris[k]
                .iter()
                .map(|&f| cover[f])
                .filter(|&b| b != FREE)
                .collect();
            blockers.dedup();
            if blockers.len() > 1 {
                continue;
            }
            let gain: i64 = tris[k]
                .iter()
                .filter(|&&f| cover[f] == FREE)
                .map(|&f| w[f])
                .sum();
            let loss: i64 = blockers.first().map_or(0, |&b| {
                tris[b]
                    .iter()
                    .filter(|f| !tris[k].contains(f))
                    .map(|&f| w[f])
                    .sum()
            });
            let delta = loss - gain;
            if delta > 0 && (temp <= 0.0 || rng.gen::<f64>() >= (-(delta as f64) / temp).exp()) {
                continue;
            }
            if let Some(&b) = blockers.first() {
                in_pack[b] = false;
                for &f in &tris[b] {
                    cover[f] = FREE;
                    give(f, &mut open, &mut pos);
                }
            }
            in_pack[k] = true;
            for &f in &tris[k] {
                cover[f] = k;
                take(f, &mut open, &mut pos);
            }
            cost += delta;
            if cost < best {
                best = cost;
                best_set = (0..tris.len()).filter(|&j| in_pack[j]).collect();
            }
        }
    }
    let mut out: Vec<Triangle> = best_set.into_iter().map(|k| tri_of[k]).collect();
    out.sort_unstable();
    out
}
