use std::collections::VecDeque;

use designforge_graph::{BipartiteGraph, Matching};
use serde::Serialize;
use thiserror::Error;

pub const NONE: usize = usize::MAX;

#[derive(Debug, Error, Clone, PartialEq, Serialize)]
pub enum MatchingError {
    #[error("parts have different sizes ({left} vs {right})")]
    UnequalParts { left: usize, right: usize },
    /// `left` is a set of left vertices whose neighbourhood `neighbourhood`
    /// is strictly smaller.
    #[error("Hall violator: {} left vertices see only {} right vertices", left.len(), neighbourhood.len())]
    HallViolator {
        left: Vec<usize>,
        neighbourhood: Vec<usize>,
    },
}

/// Maximum matching state: `mate_l[a]` is the right partner of `a` or `NONE`.
#[derive(Debug, Clone)]
pub struct MaxMatching {
    pub mate_l: Vec<usize>,
    pub mate_r: Vec<usize>,
    pub size: usize,
}

impl MaxMatching {
    pub fn edges(&self) -> Matching {
        self.mate_l
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != NONE)
            .map(|(a, &b)| (a, b))
            .collect()
    }
}

/// Hopcroft–Karp: BFS layers from free left vertices, then vertex-disjoint
/// shortest augmenting paths by DFS, repeated until no path remains.
pub fn maximum_matching(g: &BipartiteGraph) -> MaxMatching {
    let (nl, nr) = (g.left_count(), g.right_count());
    let mut mate_l = vec![NONE; nl];
    let mut mate_r = vec![NONE; nr];
    let mut size = 0;

    // Greedy warm start.
    for a in 0..nl {
        if let Some(&b) = g.left_neighbors(a).iter().find(|&&b| mate_r[b] == NONE) {
            mate_l[a] = b;
            mate_r[b] = a;
            size += 1;
        }
    }

    let mut dist = vec![0u32; nl];
    let mut iter = vec![0usize; nl];
    let mut queue = VecDeque::with_capacity(nl);
    loop {
        queue.clear();
        for a in 0..nl {
            if mate_l[a] == NONE {
                dist[a] = 0;
                queue.push_back(a);
            } else {
                dist[a] = u32::MAX;
            }
        }
        let mut found = false;
        while let Some(a) = queue.pop_front() {
            for &b in g.left_neighbors(a) {
                let c = mate_r[b];
                if c == NONE {
                    found = true;
                } else if dist[c] == u32::MAX {
                    dist[c] = dist[a] + 1;
                    queue.push_back(c);
                }
            }
        }
        if !found {
            break;
        }
        iter.iter_mut().for_each(|x| *x = 0);
        for a in 0..nl {
            if mate_l[a] == NONE && augment(g, a, &mut mate_l, &mut mate_r, &mut dist, &mut iter) {
                size += 1;
            }
        }
    }
    MaxMatching {
        mate_l,
        mate_r,
        size,
    }
}

/// Iterative layered DFS for one augmenting path from free vertex `root`.
fn augment(
    g: &BipartiteGraph,
    root: usize,
    mate_l: &mut [usize],
    mate_r: &mut [usize],
    dist: &mut [u32],
    iter: &mut [usize],
) -> bool {
    let mut stack: Vec<usize> = vec![root];
    while let Some(&a) = stack.last() {
        let nbrs = g.left_neighbors(a);
        let mut advanced = false;
        while iter[a] < nbrs.len() {
            let b = nbrs[iter[a]];
            let c = mate_r[b];
            if c == NONE {
                // Flip the path recorded on the stack.
                let mut b_cur = b;
                for &x in stack.iter().rev() {
                    let prev = mate_l[x];
                    mate_l[x] = b_cur;
                    mate_r[b_cur] = x;
                    b_cur = prev;
                }
                return true;
            }
            if dist[c] == dist[a] + 1 {
                stack.push(c);
                advanced = true;
                break;
            }
            iter[a] += 1;
        }
        if !advanced {
            dist[a] = u32::MAX;
            stack.pop();
            if let Some(&parent) = stack.last() {
                iter[parent] += 1;
            }
        }
    }
    false
}

/// Left vertices reachable by alternating paths from free left vertices,
/// with their neighbourhood. Nonempty and violating Hall when the matching
/// is maximum but not left-perfect.
pub fn hall_violator(g: &BipartiteGraph, m: &MaxMatching) -> (Vec<usize>, Vec<usize>) {
    let mut seen_l = vec![false; g.left_count()];
    let mut seen_r = vec![false; g.right_count()];
    let mut queue: VecDeque<usize> = (0..g.left_count()).filter(|&a| m.mate_l[a] == NONE).collect();
    for &a in &queue {
        seen_l[a] = true;
    }
    while let Some(a) = queue.pop_front() {
        for &b in g.left_neighbors(a) {
            if !seen_r[b] {
                seen_r[b] = true;
                let c = m.mate_r[b];
                if c != NONE && !seen_l[c] {
                    seen_l[c] = true;
                    queue.push_back(c);
                }
            }
        }
    }
    let left = (0..g.left_count()).filter(|&a| seen_l[a]).collect();
    let right = (0..g.right_count()).filter(|&b| seen_r[b]).collect();
    (left, right)
}

/// Perfect matching of a balanced bipartite graph, or a Hall violator.
pub fn perfect_matching(g: &BipartiteGraph) -> Result<Matching, MatchingError> {
    if g.left_count() != g.right_count() {
        return Err(MatchingError::UnequalParts {
            left: g.left_count(),
            right: g.right_count(),
        });
    }
    let m = maximum_matching(g);
    if m.size == g.left_count() {
        Ok(m.edges())
    } else {
        let (left, neighbourhood) = hall_violator(g, &m);
        Err(MatchingError::HallViolator {
            left,
            neighbourhood,
        })
    }
}

/// Checks that `m` is a perfect matching of `g`.
pub fn is_perfect_matching(g: &BipartiteGraph, m: &Matching) -> bool {
    if g.left_count() != g.right_count() || m.len() != g.left_count() {
        return false;
    }
    let mut l = vec![false; g.left_count()];
    let mut r = vec![false; g.right_count()];
    m.iter().all(|&(a, b)| {
        g.has_edge(a, b) && !std::mem::replace(&mut l[a], true) && !std::mem::replace(&mut r[b], true)
    })
}
