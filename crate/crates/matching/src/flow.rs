use std::collections::VecDeque;

use designforge_graph::BipartiteGraph;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Required degree of every vertex, per side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeSpec {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl DegreeSpec {
    pub fn constant(nl: usize, nr: usize, d: usize) -> Self {
        DegreeSpec {
            left: vec![d; nl],
            right: vec![d; nr],
        }
    }
}

/// Sets `A' ⊆ A`, `B' ⊆ B` with `e(A', B') < Σ_{A'} f − Σ_{B∖B'} f`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FFactorWitness {
    pub a_prime: Vec<usize>,
    pub b_prime: Vec<usize>,
}

impl FFactorWitness {
    /// Re-evaluates the cut inequality; true when it is violated.
    pub fn violates(&self, g: &BipartiteGraph, f: &DegreeSpec) -> bool {
        let e = g.e_between(&self.a_prime, &self.b_prime) as i64;
        let fa: i64 = self.a_prime.iter().map(|&a| f.left[a] as i64).sum();
        let mut in_b = vec![false; g.right_count()];
        for &b in &self.b_prime {
            in_b[b] = true;
        }
        let fb: i64 = (0..g.right_count())
            .filter(|&b| !in_b[b])
            .map(|b| f.right[b] as i64)
            .sum();
        e < fa - fb
    }
}

#[derive(Debug, Error, Clone, PartialEq, Serialize)]
pub enum FFactorError {
    #[error("degree spec has {got_left}/{got_right} entries, graph has {left}/{right} vertices")]
    Shape {
        left: usize,
        right: usize,
        got_left: usize,
        got_right: usize,
    },
    #[error("unbalanced degree sums: left {left}, right {right}")]
    Unbalanced { left: usize, right: usize },
    #[error("no f-factor exists")]
    Infeasible(FFactorWitness),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("instance has {0} edges; the exhaustive oracle accepts at most 22")]
    TooLarge(usize),
}

#[derive(Clone, Copy)]
struct Arc {
    to: usize,
    cap: u32,
}

/// Dinic max-flow on an adjacency-array network.
struct Network {
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
    level: Vec<u32>,
    next: Vec<usize>,
}

impl Network {
    fn new(n: usize) -> Self {
        Network {
            arcs: Vec::new(),
            out: vec![Vec::new(); n],
            level: vec![0; n],
            next: vec![0; n],
        }
    }

    fn add(&mut self, u: usize, v: usize, cap: u32) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { to: v, cap });
        self.arcs.push(Arc { to: u, cap: 0 });
        self.out[u].push(id);
        self.out[v].push(id + 1);
        id
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = u32::MAX);
        self.level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &id in &self.out[u] {
                let a = self.arcs[id];
                if a.cap > 0 && self.level[a.to] == u32::MAX {
                    self.level[a.to] = self.level[u] + 1;
                    q.push_back(a.to);
                }
            }
        }
        self.level[t] != u32::MAX
    }

    fn dfs(&mut self, u: usize, t: usize, pushed: u32) -> u32 {
        if u == t {
            return pushed;
        }
        while self.next[u] < self.out[u].len() {
            let id = self.out[u][self.next[u]];
            let a = self.arcs[id];
            if a.cap > 0 && self.level[a.to] == self.level[u] + 1 {
                let got = self.dfs(a.to, t, pushed.min(a.cap));
                if got > 0 {
                    self.arcs[id].cap -= got;
                    self.arcs[id ^ 1].cap += got;
                    return got;
                }
            }
            self.next[u] += 1;
        }
        0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> u64 {
        let mut flow = 0u64;
        while self.bfs(s, t) {
            self.next.iter_mut().for_each(|x| *x = 0);
            loop {
                let f = self.dfs(s, t, u32::MAX);
                if f == 0 {
                    break;
                }
                flow += u64::from(f);
            }
        }
        flow
    }

    /// Vertices reachable from `s` in the residual network.
    fn source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.out.len()];
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &id in &self.out[u] {
                let a = self.arcs[id];
                if a.cap > 0 && !seen[a.to] {
                    seen[a.to] = true;
                    q.push_back(a.to);
                }
            }
        }
        seen
    }
}

fn check_spec(g: &BipartiteGraph, f: &DegreeSpec) -> Result<(), FFactorError> {
    if f.left.len() != g.left_count() || f.right.len() != g.right_count() {
        return Err(FFactorError::Shape {
            left: g.left_count(),
            right: g.right_count(),
            got_left: f.left.len(),
            got_right: f.right.len(),
        });
    }
    let (sl, sr): (usize, usize) = (f.left.iter().sum(), f.right.iter().sum());
    if sl != sr {
        return Err(FFactorError::Unbalanced { left: sl, right: sr });
    }
    Ok(())
}

/// Spanning subgraph with `d(v) = f(v)` for all `v`, by max-flow with
/// source→a capacities `f(a)`, b→sink capacities `f(b)` and unit edges.
/// On failure the min cut `S` yields the witness `(A ∩ S, B ∖ S)`.
pub fn f_factor(g: &BipartiteGraph, f: &DegreeSpec) -> Result<BipartiteGraph, FFactorError> {
    f_factor_ordered(g, f, &g.edges())
}

/// As [`f_factor`], with edges fed to the network in random order.
pub fn f_factor_shuffled<R: Rng + ?Sized>(
    g: &BipartiteGraph,
    f: &DegreeSpec,
    rng: &mut R,
) -> Result<BipartiteGraph, FFactorError> {
    let mut edges = g.edges();
    edges.shuffle(rng);
    f_factor_ordered(g, f, &edges)
}

fn f_factor_ordered(
    g: &BipartiteGraph,
    f: &DegreeSpec,
    edges: &[(usize, usize)],
) -> Result<BipartiteGraph, FFactorError> {
    check_spec(g, f)?;
    let (nl, nr) = (g.left_count(), g.right_count());
    let s = nl + nr;
    let t = s + 1;
    let mut net = Network::new(nl + nr + 2);
    for a in 0..nl {
        if f.left[a] > 0 {
            net.add(s, a, f.left[a] as u32);
        }
    }
    for b in 0..nr {
        if f.right[b] > 0 {
            net.add(nl + b, t, f.right[b] as u32);
        }
    }
    let ids: Vec<usize> = edges.iter().map(|&(a, b)| net.add(a, nl + b, 1)).collect();
    let need: u64 = f.left.iter().map(|&x| x as u64).sum();
    let flow = net.max_flow(s, t);
    if flow == need {
        let mut h = BipartiteGraph::new(nl, nr);
        for (&(a, b), &id) in edges.iter().zip(&ids) {
            if net.arcs[id].cap == 0 {
                h.add_edge(a, b);
            }
        }
        Ok(h)
    } else {
        let side = net.source_side(s);
        let a_prime = (0..nl).filter(|&a| side[a]).collect();
        let b_prime = (0..nr).filter(|&b| !side[nl + b]).collect();
        Err(FFactorError::Infeasible(FFactorWitness { a_prime, b_prime }))
    }
}

/// Exhaustive check over all edge subsets (Gray-code order).
pub fn f_factor_oracle(g: &BipartiteGraph, f: &DegreeSpec) -> Result<bool, OracleError> {
    let edges = g.edges();
    let m = edges.len();
    if m > 22 {
        return Err(OracleError::TooLarge(m));
    }
    if f.left.len() != g.left_count() || f.right.len() != g.right_count() {
        return Ok(false);
    }
    let nl = g.left_count();
    let target: Vec<i64> = f.left.iter().chain(&f.right).map(|&x| x as i64).collect();
    let mut deg = vec![0i64; target.len()];
    let mut wrong = target.iter().filter(|&&x| x != 0).count();
    if wrong == 0 {
        return Ok(true);
    }
    let bump = |v: usize, delta: i64, deg: &mut [i64], wrong: &mut usize| {
        let before = deg[v] == target[v];
        deg[v] += delta;
        let after = deg[v] == target[v];
        match (before, after) {
            (true, false) => *wrong += 1,
            (false, true) => *wrong -= 1,
            _ => {}
        }
    };
    let mut on = vec![false; m];
    for i in 1u64..(1u64 << m) {
        let bit = i.trailing_zeros() as usize;
        let (a, b) = edges[bit];
        let delta = if on[bit] { -1 } else { 1 };
        on[bit] = !on[bit];
        bump(a, delta, &mut deg, &mut wrong);
        bump(nl + b, delta, &mut deg, &mut wrong);
        if wrong == 0 {
            return Ok(true);
        }
    }
    Ok(false)
}
