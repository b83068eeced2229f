//! Direct triangle decomposition of `K_n` for small `n`.

use designforge_graph::Triangle;
use rand::seq::SliceRandom;
use rand::Rng;

const NONE: u32 = u32::MAX;

/// Stinson-style hill climb over the present triangles of `K_n`.
///
/// Each step takes a point `x` with an uncovered pair, two uncovered
/// partners `y, z` with `x y z` present, and inserts `x y z`, evicting the
/// block on `y z` if there is one. Returns the triples once every pair is
/// covered, or `None` after `steps` steps.
pub fn sts_hill_climb<R: Rng + ?Sized>(
    n: usize,
    mut present: impl FnMut(&Triangle) -> bool,
    steps: u64,
    rng: &mut R,
) -> Option<Vec<[usize; 3]>> {
    let mut pair = vec![NONE; n * n];
    let mut blocks: Vec<Option<[usize; 3]>> = Vec::new();
    let mut free: Vec<u32> = Vec::new();
    let mut covered_at = vec![0usize; n];
    let mut covered = 0usize;
    let target = n * (n - 1) / 2;
    let set = |pair: &mut [u32], a: usize, b: usize, v: u32| {
        pair[a * n + b] = v;
        pair[b * n + a] = v;
    };
    for _ in 0..steps {
        if covered == target {
            break;
        }
        let live: Vec<usize> = (0..n).filter(|&x| covered_at[x] < n - 1).collect();
        let &x = live.choose(rng)?;
        let open: Vec<usize> = (0..n).filter(|&y| y != x && pair[x * n + y] == NONE).collect();
        let &y = open.choose(rng).expect("x is live");
        let zs: Vec<usize> = open
            .iter()
            .copied()
            .filter(|&z| z != y && present(&Triangle::new(x, y, z)))
            .collect();
        let Some(&z) = zs.choose(rng) else { continue };
        let old = pair[y * n + z];
        if old != NONE {
            let [a, b, c] = blocks[old as usize].take().expect("live block");
            for (u, v) in [(a, b), (a, c), (b, c)] {
                set(&mut pair, u, v, NONE);
                covered_at[u] -= 1;
                covered_at[v] -= 1;
            }
            covered -= 3;
            free.push(old);
        }
        let id = match free.pop() {
            Some(id) => {
                blocks[id as usize] = Some([x, y, z]);
                id
            }
            None => {
                blocks.push(Some([x, y, z]));
                (blocks.len() - 1) as u32
            }
        };
        for (u, v) in [(x, y), (x, z), (y, z)] {
            set(&mut pair, u, v, id);
            covered_at[u] += 1;
            covered_at[v] += 1;
        }
        covered += 3;
    }
    if covered != target {
        return None;
    }
    let mut out: Vec<[usize; 3]> = blocks
        .into_iter()
        .flatten()
        .map(|[a, b, c]| Triangle::new(a, b, c).vertices())
        .collect();
    out.sort_unstable();
    Some(out)
}
